#include "sfdm/transforms.hpp"

#include <cmath>

namespace sfdm {

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

std::vector<cdouble> make_dct_twiddle(int n) {
  std::vector<cdouble> tw(n);
  for (int k = 0; k < n; ++k) {
    double a = -kPi * k / (2.0 * n);
    tw[k] = {std::cos(a), std::sin(a)};
  }
  return tw;
}
}  // namespace

void validate_spectrum(const Spectrum& s, const std::string& who) {
  check_arg(s.shape.rows >= 1 && s.shape.cols >= 1, who + ": empty shape");
  check_arg(s.channels >= 1, who + ": channels must be positive");
  size_t want = s.per_channel() * s.channels;
  if (s.kind == TransformKind::Dct2) {
    check_arg(s.dct.size() == want && s.dft.empty(),
              who + ": Dct2 spectrum must carry real coefficients only");
  } else {
    check_arg(s.dft.size() == want && s.dct.empty(),
              who + ": Dft spectrum must carry complex coefficients only");
  }
}

double spectrum_norm(const Spectrum& s) {
  return s.kind == TransformKind::Dct2 ? l2_norm(s.dct) : l2_norm(s.dft);
}

TransformOperator::TransformOperator(TransformKind kind, GridShape shape)
    : kind_(kind), shape_(shape), row_tables_(shape.cols) {
  check_arg(shape.rows >= 1 && shape.cols >= 1,
            "TransformOperator: axis lengths must be positive");
  if (shape.rows > 1) col_tables_ = detail::FftTables(shape.rows);
  if (kind == TransformKind::Dct2) {
    row_twiddle_ = make_dct_twiddle(shape.cols);
    if (shape.rows > 1) col_twiddle_ = make_dct_twiddle(shape.rows);
  }
}

// DCT-II of one axis through a same-length complex FFT. With the even/odd
// permutation v = [x_0, x_2, x_4, ..., x_5, x_3, x_1] and V = FFT(v), the
// unnormalized coefficients satisfy C_k = Re(exp(-i pi k/(2N)) V_k); the
// inverse reconstructs V from C via V_k = exp(+i pi k/(2N)) (C_k - i C_{N-k}),
// which is the conjugate-symmetry completion forced by v being real.
void TransformOperator::dct_axis_forward(const double* in, double* out, int n,
                                         bool row_axis,
                                         std::vector<cdouble>& work) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const auto& tables = row_axis ? row_tables_ : col_tables_;
  const auto& tw = row_axis ? row_twiddle_ : col_twiddle_;
  const int half_up = (n + 1) / 2;
  for (int i = 0; i < half_up; ++i) work[i] = in[2 * i];
  for (int i = 0; i < n / 2; ++i) work[n - 1 - i] = in[2 * i + 1];
  detail::fft(work.data(), tables, false);
  const double s0 = std::sqrt(1.0 / n);
  const double s = std::sqrt(2.0 / n);
  out[0] = s0 * work[0].real();
  for (int k = 1; k < n; ++k) {
    const cdouble& v = work[k];
    const cdouble& t = tw[k];
    out[k] = s * (t.real() * v.real() - t.imag() * v.imag());
  }
}

void TransformOperator::dct_axis_inverse(const double* in, double* out, int n,
                                         bool row_axis,
                                         std::vector<cdouble>& work) const {
  if (n == 1) {
    out[0] = in[0];
    return;
  }
  const auto& tables = row_axis ? row_tables_ : col_tables_;
  const auto& tw = row_axis ? row_twiddle_ : col_twiddle_;
  const double u0 = std::sqrt(static_cast<double>(n));
  const double u = std::sqrt(n / 2.0);
  work[0] = cdouble(u0 * in[0], 0.0);
  for (int k = 1; k < n; ++k) {
    double ck = u * in[k];
    double cnk = u * in[n - k];
    // conj(tw[k]) * (ck - i*cnk)
    const cdouble& t = tw[k];
    work[k] = cdouble(t.real() * ck - t.imag() * cnk,
                      -(t.imag() * ck + t.real() * cnk));
  }
  detail::fft(work.data(), tables, true);
  const double inv_n = 1.0 / n;
  const int half_up = (n + 1) / 2;
  for (int i = 0; i < half_up; ++i) out[2 * i] = work[i].real() * inv_n;
  for (int i = 0; i < n / 2; ++i) out[2 * i + 1] = work[n - 1 - i].real() * inv_n;
}

Spectrum TransformOperator::forward(const Signal& x) const {
  validate_signal(x, "TransformOperator::forward");
  check_arg(x.shape == shape_, "TransformOperator::forward: shape mismatch");
  const int rows = shape_.rows, cols = shape_.cols;
  const size_t plane = static_cast<size_t>(rows) * cols;

  Spectrum out;
  out.kind = kind_;
  out.shape = shape_;
  out.channels = x.channels;

  if (kind_ == TransformKind::Dct2) {
    out.dct.resize(plane * x.channels);
    std::vector<cdouble> work(std::max(rows, cols));
    std::vector<double> colbuf_in(rows), colbuf_out(rows);
    for (int c = 0; c < x.channels; ++c) {
      const double* src = x.channel(c);
      double* dst = out.dct.data() + plane * c;
      for (int r = 0; r < rows; ++r)
        dct_axis_forward(src + static_cast<size_t>(r) * cols,
                         dst + static_cast<size_t>(r) * cols, cols, true, work);
      if (rows > 1) {
        for (int j = 0; j < cols; ++j) {
          for (int r = 0; r < rows; ++r) colbuf_in[r] = dst[static_cast<size_t>(r) * cols + j];
          dct_axis_forward(colbuf_in.data(), colbuf_out.data(), rows, false, work);
          for (int r = 0; r < rows; ++r) dst[static_cast<size_t>(r) * cols + j] = colbuf_out[r];
        }
      }
    }
  } else {
    out.dft.resize(plane * x.channels);
    std::vector<cdouble> buf(std::max(rows, cols));
    const double row_scale = 1.0 / std::sqrt(static_cast<double>(cols));
    const double col_scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (int c = 0; c < x.channels; ++c) {
      const double* src = x.channel(c);
      cdouble* dst = out.dft.data() + plane * c;
      for (int r = 0; r < rows; ++r) {
        for (int j = 0; j < cols; ++j) buf[j] = src[static_cast<size_t>(r) * cols + j];
        detail::fft(buf.data(), row_tables_, false);
        for (int j = 0; j < cols; ++j) dst[static_cast<size_t>(r) * cols + j] = buf[j] * row_scale;
      }
      if (rows > 1) {
        for (int j = 0; j < cols; ++j) {
          for (int r = 0; r < rows; ++r) buf[r] = dst[static_cast<size_t>(r) * cols + j];
          detail::fft(buf.data(), col_tables_, false);
          for (int r = 0; r < rows; ++r) dst[static_cast<size_t>(r) * cols + j] = buf[r] * col_scale;
        }
      }
    }
  }
  return out;
}

std::vector<cdouble> TransformOperator::inverse_complex(const Spectrum& X) const {
  validate_spectrum(X, "TransformOperator::inverse_complex");
  check_arg(kind_ == TransformKind::Dft && X.kind == TransformKind::Dft,
            "TransformOperator::inverse_complex: Dft spectra only");
  check_arg(X.shape == shape_, "TransformOperator::inverse_complex: shape mismatch");
  const int rows = shape_.rows, cols = shape_.cols;
  const size_t plane = static_cast<size_t>(rows) * cols;
  std::vector<cdouble> out(plane * X.channels);
  std::vector<cdouble> buf(std::max(rows, cols));
  const double row_scale = 1.0 / std::sqrt(static_cast<double>(cols));
  const double col_scale = 1.0 / std::sqrt(static_cast<double>(rows));
  for (int c = 0; c < X.channels; ++c) {
    const cdouble* src = X.dft.data() + plane * c;
    cdouble* dst = out.data() + plane * c;
    for (int r = 0; r < rows; ++r) {
      for (int j = 0; j < cols; ++j) buf[j] = src[static_cast<size_t>(r) * cols + j];
      detail::fft(buf.data(), row_tables_, true);
      for (int j = 0; j < cols; ++j) dst[static_cast<size_t>(r) * cols + j] = buf[j] * row_scale;
    }
    if (rows > 1) {
      for (int j = 0; j < cols; ++j) {
        for (int r = 0; r < rows; ++r) buf[r] = dst[static_cast<size_t>(r) * cols + j];
        detail::fft(buf.data(), col_tables_, true);
        for (int r = 0; r < rows; ++r) dst[static_cast<size_t>(r) * cols + j] = buf[r] * col_scale;
      }
    }
  }
  return out;
}

Signal TransformOperator::inverse(const Spectrum& X) const {
  validate_spectrum(X, "TransformOperator::inverse");
  check_arg(X.kind == kind_, "TransformOperator::inverse: transform kind mismatch");
  check_arg(X.shape == shape_, "TransformOperator::inverse: shape mismatch");
  const int rows = shape_.rows, cols = shape_.cols;
  const size_t plane = static_cast<size_t>(rows) * cols;

  Signal out(shape_, X.channels);
  if (kind_ == TransformKind::Dct2) {
    std::vector<cdouble> work(std::max(rows, cols));
    std::vector<double> colbuf_in(rows), colbuf_out(rows);
    std::vector<double> stage(plane);
    for (int c = 0; c < X.channels; ++c) {
      const double* src = X.dct.data() + plane * c;
      double* dst = out.channel(c);
      const double* row_src = src;
      if (rows > 1) {
        // Undo the column pass first, then the row pass.
        for (int j = 0; j < cols; ++j) {
          for (int r = 0; r < rows; ++r) colbuf_in[r] = src[static_cast<size_t>(r) * cols + j];
          dct_axis_inverse(colbuf_in.data(), colbuf_out.data(), rows, false, work);
          for (int r = 0; r < rows; ++r) stage[static_cast<size_t>(r) * cols + j] = colbuf_out[r];
        }
        row_src = stage.data();
      }
      for (int r = 0; r < rows; ++r)
        dct_axis_inverse(row_src + static_cast<size_t>(r) * cols,
                         dst + static_cast<size_t>(r) * cols, cols, true, work);
    }
  } else {
    std::vector<cdouble> full = inverse_complex(X);
    for (size_t i = 0; i < full.size(); ++i) out.values[i] = full[i].real();
  }
  return out;
}

namespace {
Signal wrap_1d(const std::vector<double>& x) {
  Signal s(GridShape::one_d(static_cast<int>(x.size())));
  s.values = x;
  return s;
}
}  // namespace

std::vector<double> dct2_forward_1d(const std::vector<double>& x) {
  TransformOperator op(TransformKind::Dct2, GridShape::one_d(static_cast<int>(x.size())));
  return op.forward(wrap_1d(x)).dct;
}

std::vector<double> dct2_inverse_1d(const std::vector<double>& X) {
  TransformOperator op(TransformKind::Dct2, GridShape::one_d(static_cast<int>(X.size())));
  Spectrum s;
  s.kind = TransformKind::Dct2;
  s.shape = GridShape::one_d(static_cast<int>(X.size()));
  s.dct = X;
  return op.inverse(s).values;
}

std::vector<cdouble> dft_forward_1d(const std::vector<double>& x) {
  TransformOperator op(TransformKind::Dft, GridShape::one_d(static_cast<int>(x.size())));
  return op.forward(wrap_1d(x)).dft;
}

namespace {
Spectrum wrap_dft(const std::vector<cdouble>& X) {
  Spectrum s;
  s.kind = TransformKind::Dft;
  s.shape = GridShape::one_d(static_cast<int>(X.size()));
  s.dft = X;
  return s;
}
}  // namespace

std::vector<double> dft_inverse_1d(const std::vector<cdouble>& X) {
  TransformOperator op(TransformKind::Dft, GridShape::one_d(static_cast<int>(X.size())));
  return op.inverse(wrap_dft(X)).values;
}

std::vector<cdouble> dft_inverse_1d_complex(const std::vector<cdouble>& X) {
  TransformOperator op(TransformKind::Dft, GridShape::one_d(static_cast<int>(X.size())));
  return op.inverse_complex(wrap_dft(X));
}

}  // namespace sfdm
