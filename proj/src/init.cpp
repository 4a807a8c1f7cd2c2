#include "sfdm/init.hpp"

#include <cmath>

#include "sfdm/activation.hpp"
#include "sfdm/kspace.hpp"

namespace sfdm {

namespace {
void check_nm(int n_full, int modes, const char* who) {
  check_arg(modes >= 1, std::string(who) + ": modes must be positive");
  check_arg(n_full >= modes, std::string(who) + ": modes cannot exceed resolution");
}

// Fill order is storage order; complex entries draw Re then Im.
void fill_gaussian(std::vector<double>& v, double sigma, RandomStream rs) {
  for (double& x : v) x = rs.gaussian(sigma);
}

void fill_gaussian(std::vector<cdouble>& v, double sigma_component, RandomStream rs) {
  for (cdouble& z : v) {
    double re = rs.gaussian(sigma_component);
    double im = rs.gaussian(sigma_component);
    z = {re, im};
  }
}
}  // namespace

double vp_dense_variance(int n_full, int modes) {
  check_nm(n_full, modes, "vp_dense_variance");
  return static_cast<double>(n_full) / (static_cast<double>(modes) * modes);
}

double vp_dense_component_variance_dft(int n_full, int modes) {
  return 0.5 * vp_dense_variance(n_full, modes);
}

double vp_diagonal_variance(int n_full, int modes) {
  check_nm(n_full, modes, "vp_diagonal_variance");
  return static_cast<double>(n_full) / modes;
}

double xavier_variance(int c_in) {
  check_arg(c_in >= 1, "xavier_variance: c_in must be positive");
  return 1.0 / c_in;
}

double vp_per_mode_component_variance(TransformKind kind, int n_full, int modes,
                                      int c_in) {
  check_nm(n_full, modes, "vp_per_mode_component_variance");
  check_arg(c_in >= 1, "vp_per_mode_component_variance: c_in must be positive");
  double v = static_cast<double>(n_full) / (static_cast<double>(modes) * c_in);
  return kind == TransformKind::Dft ? 0.5 * v : v;
}

KSpaceWeights<double> sample_vp_dense_dct(int n_full, int modes, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_vp_dense_dct");
  KSpaceWeights<double> w;
  w.layout = WeightLayout::ModeDense;
  w.modes = modes;
  w.values.resize(static_cast<size_t>(modes) * modes);
  fill_gaussian(w.values, std::sqrt(vp_dense_variance(n_full, modes)), RandomStream(seed));
  return w;
}

KSpaceWeights<cdouble> sample_vp_dense_dft(int n_full, int modes, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_vp_dense_dft");
  KSpaceWeights<cdouble> w;
  w.layout = WeightLayout::ModeDense;
  w.modes = modes;
  w.values.resize(static_cast<size_t>(modes) * modes);
  fill_gaussian(w.values, std::sqrt(vp_dense_component_variance_dft(n_full, modes)),
                RandomStream(seed));
  return w;
}

KSpaceWeights<double> sample_vp_diagonal(int n_full, int modes, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_vp_diagonal");
  KSpaceWeights<double> w;
  w.layout = WeightLayout::PerMode;
  w.modes = modes;
  w.values.resize(modes);
  fill_gaussian(w.values, std::sqrt(vp_diagonal_variance(n_full, modes)), RandomStream(seed));
  return w;
}

KSpaceWeights<cdouble> sample_vp_diagonal_dft(int n_full, int modes, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_vp_diagonal_dft");
  KSpaceWeights<cdouble> w;
  w.layout = WeightLayout::PerMode;
  w.modes = modes;
  w.values.resize(modes);
  fill_gaussian(w.values,
                std::sqrt(vp_per_mode_component_variance(TransformKind::Dft, n_full, modes, 1)),
                RandomStream(seed));
  return w;
}

KSpaceWeights<double> sample_xavier(int n_full, int modes, int c_in, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_xavier");
  KSpaceWeights<double> w;
  w.layout = WeightLayout::ModeDense;
  w.modes = modes;
  w.values.resize(static_cast<size_t>(modes) * modes);
  fill_gaussian(w.values, std::sqrt(xavier_variance(c_in)), RandomStream(seed));
  return w;
}

KSpaceWeights<cdouble> sample_xavier_dft(int n_full, int modes, int c_in, std::uint64_t seed) {
  check_nm(n_full, modes, "sample_xavier_dft");
  KSpaceWeights<cdouble> w;
  w.layout = WeightLayout::ModeDense;
  w.modes = modes;
  w.values.resize(static_cast<size_t>(modes) * modes);
  // Per-component variance halved so |entry|^2 averages 1/c_in.
  fill_gaussian(w.values, std::sqrt(0.5 * xavier_variance(c_in)), RandomStream(seed));
  return w;
}

const char* init_family_name(InitFamily f) {
  switch (f) {
    case InitFamily::VpDense: return "vp_dense";
    case InitFamily::VpDiagonal: return "vp_diagonal";
    case InitFamily::Xavier: return "xavier";
  }
  return "?";
}

namespace {

// Accumulates per-coordinate first and second moments; total variance is the
// sum over coordinates of E[z^2] - E[z]^2.
struct VarianceAccumulator {
  std::vector<double> s1, s2;
  explicit VarianceAccumulator(size_t n) : s1(n, 0.0), s2(n, 0.0) {}
  void add(size_t i, double v) {
    s1[i] += v;
    s2[i] += v * v;
  }
  void reset() {
    std::fill(s1.begin(), s1.end(), 0.0);
    std::fill(s2.begin(), s2.end(), 0.0);
  }
  double total(int count) const {
    double t = 0.0;
    for (size_t i = 0; i < s1.size(); ++i) {
      double mean = s1[i] / count;
      t += s2[i] / count - mean * mean;
    }
    return t;
  }
};

struct ProbeWeights {
  std::vector<double> re_values;    // Dct2 families
  std::vector<cdouble> cx_values;   // Dft families
  bool dense = false;
};

ProbeWeights draw_probe_weights(const InitScheme& scheme, std::uint64_t seed) {
  ProbeWeights pw;
  const int n = scheme.n_full, m = scheme.modes;
  if (scheme.kind == TransformKind::Dct2) {
    switch (scheme.family) {
      case InitFamily::VpDense:
        pw.re_values = sample_vp_dense_dct(n, m, seed).values;
        pw.dense = true;
        break;
      case InitFamily::VpDiagonal:
        pw.re_values = sample_vp_diagonal(n, m, seed).values;
        break;
      case InitFamily::Xavier:
        // Dense baseline: fan-in of the mode-mixing map is m.
        pw.re_values = sample_xavier(n, m, m, seed).values;
        pw.dense = true;
        break;
    }
  } else {
    switch (scheme.family) {
      case InitFamily::VpDense:
        pw.cx_values = sample_vp_dense_dft(n, m, seed).values;
        pw.dense = true;
        break;
      case InitFamily::VpDiagonal:
        pw.cx_values = sample_vp_diagonal_dft(n, m, seed).values;
        break;
      case InitFamily::Xavier:
        pw.cx_values = sample_xavier_dft(n, m, m, seed).values;
        pw.dense = true;
        break;
    }
  }
  return pw;
}

}  // namespace

VarianceProbeReport variance_probe(const InitScheme& scheme, int batch,
                                   int weight_samples, bool measure_post_gelu) {
  check_nm(scheme.n_full, scheme.modes, "variance_probe");
  check_arg(batch >= 2, "variance_probe: batch must be at least 2");
  check_arg(weight_samples >= 1, "variance_probe: need at least one weight sample");

  const int n = scheme.n_full, m = scheme.modes;
  const bool complex_path = scheme.kind == TransformKind::Dft;
  TransformOperator op(scheme.kind, GridShape::one_d(n));
  RandomStream root(scheme.seed);
  RandomStream input_rs = root.substream(0xA001);
  RandomStream weight_root = root.substream(0xB001);

  // Draw the input batch once; reused across weight draws. Store only the
  // truncated forward coefficients plus the empirical input variance.
  std::vector<double> xm_re;
  std::vector<cdouble> xm_cx;
  if (complex_path)
    xm_cx.resize(static_cast<size_t>(batch) * m);
  else
    xm_re.resize(static_cast<size_t>(batch) * m);

  VarianceAccumulator in_acc(n);
  Signal x(GridShape::one_d(n));
  for (int b = 0; b < batch; ++b) {
    for (int i = 0; i < n; ++i) {
      x.values[i] = input_rs.gaussian();
      in_acc.add(i, x.values[i]);
    }
    Spectrum X = op.forward(x);
    if (complex_path)
      for (int k = 0; k < m; ++k) xm_cx[static_cast<size_t>(b) * m + k] = X.dft[k];
    else
      for (int k = 0; k < m; ++k) xm_re[static_cast<size_t>(b) * m + k] = X.dct[k];
  }
  const double input_total_var = in_acc.total(batch);

  VarianceProbeReport report;
  report.scheme = scheme;
  report.batch = batch;
  report.weight_samples = weight_samples;
  report.ratios.reserve(weight_samples);

  const int gelu_draws = measure_post_gelu ? std::min(weight_samples, 16) : 0;
  double gelu_ratio_sum = 0.0;

  // Persistent embedded spectrum: only the m low-pass slots are ever written.
  Spectrum Z;
  Z.kind = scheme.kind;
  Z.shape = GridShape::one_d(n);
  if (complex_path)
    Z.dft.assign(n, cdouble(0));
  else
    Z.dct.assign(n, 0.0);

  VarianceAccumulator out_acc(complex_path ? 2 * n : n);
  VarianceAccumulator gelu_acc(complex_path ? 2 * n : n);
  std::vector<double> ym_re(m);
  std::vector<cdouble> ym_cx(m);

  for (int s = 0; s < weight_samples; ++s) {
    ProbeWeights pw = draw_probe_weights(scheme, weight_root.substream(s).seed());
    out_acc.reset();
    const bool with_gelu = s < gelu_draws;
    if (with_gelu) gelu_acc.reset();

    for (int b = 0; b < batch; ++b) {
      if (!complex_path) {
        const double* xm = &xm_re[static_cast<size_t>(b) * m];
        if (pw.dense) {
          for (int k = 0; k < m; ++k) {
            double acc = 0.0;
            const double* row = &pw.re_values[static_cast<size_t>(k) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * xm[j];
            ym_re[k] = acc;
          }
        } else {
          for (int k = 0; k < m; ++k) ym_re[k] = pw.re_values[k] * xm[k];
        }
        for (int k = 0; k < m; ++k) Z.dct[k] = ym_re[k];
        Signal out = op.inverse(Z);
        for (int i = 0; i < n; ++i) out_acc.add(i, out.values[i]);
        if (with_gelu)
          for (int i = 0; i < n; ++i) gelu_acc.add(i, gelu(out.values[i]));
      } else {
        const cdouble* xm = &xm_cx[static_cast<size_t>(b) * m];
        if (pw.dense) {
          for (int k = 0; k < m; ++k) {
            cdouble acc = 0.0;
            const cdouble* row = &pw.cx_values[static_cast<size_t>(k) * m];
            for (int j = 0; j < m; ++j) acc += row[j] * xm[j];
            ym_cx[k] = acc;
          }
        } else {
          for (int k = 0; k < m; ++k) ym_cx[k] = pw.cx_values[k] * xm[k];
        }
        for (int k = 0; k < m; ++k) Z.dft[k] = ym_cx[k];
        std::vector<cdouble> out = op.inverse_complex(Z);
        for (int i = 0; i < n; ++i) {
          out_acc.add(i, out[i].real());
          out_acc.add(static_cast<size_t>(n) + i, out[i].imag());
        }
        if (with_gelu)
          for (int i = 0; i < n; ++i) {
            gelu_acc.add(i, gelu(out[i].real()));
            gelu_acc.add(static_cast<size_t>(n) + i, gelu(out[i].imag()));
          }
      }
    }
    report.ratios.push_back(out_acc.total(batch) / input_total_var);
    if (with_gelu) gelu_ratio_sum += gelu_acc.total(batch) / input_total_var;
  }

  double mean = 0.0;
  for (double r : report.ratios) mean += r;
  mean /= weight_samples;
  double var = 0.0;
  for (double r : report.ratios) var += (r - mean) * (r - mean);
  report.mean_ratio = mean;
  report.std_ratio = std::sqrt(var / weight_samples);
  report.post_gelu_mean_ratio = gelu_draws > 0 ? gelu_ratio_sum / gelu_draws : 0.0;
  return report;
}

}  // namespace sfdm
