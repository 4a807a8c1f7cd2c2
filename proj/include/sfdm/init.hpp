#pragma once
// Weight containers and initialization schemes for k-space layers.
//
// The variance-preserving (vp) schemes size the weight variance so that a
// single spectral layer x -> inv(T)(embed(A * truncate(T(x)))) keeps the
// total output variance equal to the total input variance under white
// Gaussian inputs of length N with m retained modes:
//
//   dense real (Dct2)     entries ~ N(0, N / m^2)
//   dense complex (Dft)   Re and Im each ~ N(0, N / (2 m^2))
//   diagonal real         entries ~ N(0, N / m)
//
// The baseline `xavier` scheme draws N(0, 1/c_in) regardless of N, which is
// what makes its output variance collapse like m/N as the resolution grows
// with m fixed; variance_probe measures exactly that.
//
// Weight layouts:
//   ModeDense  a dense m x m matrix mixing retained modes (single channel),
//              values row-major [k_out][k_in].
//   PerMode    one dense c_out x c_in channel map per retained mode,
//              values [c_out][c_in][mode]; with c_in = c_out = 1 this is the
//              length-m diagonal.

#include <cstdint>
#include <vector>

#include "sfdm/common.hpp"
#include "sfdm/rng.hpp"
#include "sfdm/transforms.hpp"

namespace sfdm {

enum class WeightLayout { ModeDense, PerMode };

template <typename T>
struct KSpaceWeights {
  WeightLayout layout = WeightLayout::PerMode;
  int modes = 0;
  int c_in = 1;
  int c_out = 1;
  std::vector<T> values;

  size_t expected_size() const {
    return layout == WeightLayout::ModeDense
               ? static_cast<size_t>(modes) * modes
               : static_cast<size_t>(modes) * c_in * c_out;
  }
  // PerMode accessor: coefficient multiplying input channel i into output
  // channel o at retained mode k.
  T& at(int o, int i, int k) {
    return values[(static_cast<size_t>(o) * c_in + i) * modes + k];
  }
  const T& at(int o, int i, int k) const {
    return values[(static_cast<size_t>(o) * c_in + i) * modes + k];
  }
};

template <typename T>
void validate_weights(const KSpaceWeights<T>& w, const std::string& who) {
  check_arg(w.modes >= 1, who + ": modes must be positive");
  check_arg(w.c_in >= 1 && w.c_out >= 1, who + ": channel counts must be positive");
  if (w.layout == WeightLayout::ModeDense)
    check_arg(w.c_in == 1 && w.c_out == 1, who + ": ModeDense weights are single-channel");
  check_arg(w.values.size() == w.expected_size(), who + ": value count mismatch");
}

// Closed-form variances, exposed so tests can pin the numbers directly.
double vp_dense_variance(int n_full, int modes);                // N / m^2
double vp_dense_component_variance_dft(int n_full, int modes);  // N / (2 m^2)
double vp_diagonal_variance(int n_full, int modes);             // N / m
double xavier_variance(int c_in);                               // 1 / c_in

// Fan-in generalization used by multi-channel model builders: a PerMode map
// with c_in input channels preserves variance when each component carries
// N/(m*c_in) (real) or N/(2*m*c_in) per part (complex).
double vp_per_mode_component_variance(TransformKind kind, int n_full, int modes,
                                      int c_in);

KSpaceWeights<double> sample_vp_dense_dct(int n_full, int modes, std::uint64_t seed);
KSpaceWeights<cdouble> sample_vp_dense_dft(int n_full, int modes, std::uint64_t seed);
KSpaceWeights<double> sample_vp_diagonal(int n_full, int modes, std::uint64_t seed);
KSpaceWeights<cdouble> sample_vp_diagonal_dft(int n_full, int modes, std::uint64_t seed);

// Resolution-independent baseline, dense m x m, entries N(0, 1/c_in).
KSpaceWeights<double> sample_xavier(int n_full, int modes, int c_in, std::uint64_t seed);
KSpaceWeights<cdouble> sample_xavier_dft(int n_full, int modes, int c_in, std::uint64_t seed);

enum class InitFamily { VpDense, VpDiagonal, Xavier };

const char* init_family_name(InitFamily f);

struct InitScheme {
  InitFamily family = InitFamily::VpDense;
  TransformKind kind = TransformKind::Dct2;
  int n_full = 0;  // full 1-D resolution N
  int modes = 0;   // retained modes m
  std::uint64_t seed = 0;
};

struct VarianceProbeReport {
  InitScheme scheme;
  int batch = 0;
  int weight_samples = 0;
  double mean_ratio = 0.0;  // mean over weight draws of V[out]/V[in]
  double std_ratio = 0.0;
  std::vector<double> ratios;
  // Informational only: same ratio measured after a GeLU on the layer
  // output. The schemes above size the linear map; nothing is asserted here.
  double post_gelu_mean_ratio = 0.0;
};

// Monte Carlo variance study of the single spectral layer built from
// `scheme` on a low-pass selector: draws `batch` white inputs once, then for
// each of `weight_samples` weight draws pushes the batch through
// inv(T)(embed(A truncate(T(x)))) and reports the total-variance ratio.
// For Dft schemes the layer output is complex and the variance counts both
// components; the plain (non-mirrored) embedding is used, matching the
// single-layer analysis the vp formulas come from.
VarianceProbeReport variance_probe(const InitScheme& scheme, int batch,
                                   int weight_samples,
                                   bool measure_post_gelu = false);

}  // namespace sfdm
