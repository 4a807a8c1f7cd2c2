#pragma once
// Orthonormal spectral transforms on real grids.
//
// Two kinds:
//   Dct2  type-II discrete cosine transform, orthonormal scaling:
//           X_k = s_k * sum_n x_n cos(pi (2n+1) k / (2N)),
//           s_0 = sqrt(1/N), s_k = sqrt(2/N) for k >= 1.   (real coefficients)
//   Dft   unitary discrete Fourier transform:
//           X_k = (1/sqrt(N)) sum_n x_n exp(-2 pi i k n / N),
//           X_{N-k} = conj(X_k) for real inputs.           (complex coefficients)
//
// Both are isometries: ||T(x)||_2 == ||x||_2 to roundoff (Parseval), and
// inverse(forward(x)) == x. Two-dimensional grids transform separably (rows,
// then columns). Runtime is O(N log N) for power-of-two axes via the FFT
// kernels; other axis lengths fall back to the definitional O(N^2) sum.

#include <vector>

#include "sfdm/common.hpp"
#include "sfdm/fft.hpp"

namespace sfdm {

enum class TransformKind { Dct2, Dft };

inline const char* transform_kind_name(TransformKind k) {
  return k == TransformKind::Dct2 ? "dct2" : "dft";
}

// Coefficient grid. Exactly one of the storage vectors is populated:
// `dct` for Dct2 spectra, `dft` for Dft spectra. Layout matches Signal:
// row-major per channel, channels consecutive.
struct Spectrum {
  TransformKind kind = TransformKind::Dct2;
  GridShape shape;
  int channels = 1;
  std::vector<double> dct;
  std::vector<cdouble> dft;

  size_t per_channel() const { return static_cast<size_t>(shape.size()); }
};

void validate_spectrum(const Spectrum& s, const std::string& who);

// L2 norm over all coefficients (complex modulus for Dft).
double spectrum_norm(const Spectrum& s);

// Precomputes FFT and twiddle tables for one grid shape; immutable after
// construction and safe to share across threads.
class TransformOperator {
 public:
  TransformOperator(TransformKind kind, GridShape shape);

  TransformKind kind() const { return kind_; }
  GridShape shape() const { return shape_; }

  Spectrum forward(const Signal& x) const;
  Signal inverse(const Spectrum& X) const;

  // Full complex inverse (Dft only); exposes the imaginary residue that
  // Signal-returning inverse() discards.
  std::vector<cdouble> inverse_complex(const Spectrum& X) const;

 private:
  TransformKind kind_;
  GridShape shape_;
  detail::FftTables row_tables_;  // along cols (length shape_.cols)
  detail::FftTables col_tables_;  // along rows (length shape_.rows), 2-D only
  std::vector<cdouble> row_twiddle_;  // exp(-i pi k / (2*cols)), Dct2 only
  std::vector<cdouble> col_twiddle_;  // exp(-i pi k / (2*rows)), Dct2 only

  void dct_axis_forward(const double* in, double* out, int n, bool row_axis,
                        std::vector<cdouble>& work) const;
  void dct_axis_inverse(const double* in, double* out, int n, bool row_axis,
                        std::vector<cdouble>& work) const;
};

// One-dimensional conveniences used throughout the tests.
std::vector<double> dct2_forward_1d(const std::vector<double>& x);
std::vector<double> dct2_inverse_1d(const std::vector<double>& X);
std::vector<cdouble> dft_forward_1d(const std::vector<double>& x);
std::vector<double> dft_inverse_1d(const std::vector<cdouble>& X);
std::vector<cdouble> dft_inverse_1d_complex(const std::vector<cdouble>& X);

}  // namespace sfdm
