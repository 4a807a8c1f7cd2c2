#pragma once
// Mode retention analysis: which m coefficients to keep, what truncation
// costs, and whether a map's k-space Jacobian leaks onto discarded modes.
//
// Loss decomposition convention: with a model whose prediction lives on the
// selected modes, the full squared k-space error splits exactly into
//   L = J + R_o,
// where J sums |Y_k - Yhat_k|^2 over selected k and R_o sums |Y_k|^2 over
// discarded k. R_o is the irreducible part: no weight setting reduces it.
// An L1 variant (sums of absolute values) is available for both pieces; the
// squared-L2 form is the default because it matches the norm the training
// objective is built on. All dataset quantities are means over samples.

#include <functional>
#include <vector>

#include "sfdm/kspace.hpp"
#include "sfdm/layers.hpp"

namespace sfdm {

// Per-mode mean coefficient magnitude over a dataset, the ranking signal for
// top-m selection. Computed from the training split only.
struct SpectrumStats {
  GridShape shape;
  std::vector<double> mean_abs;  // extent shape.size()
  int sample_count = 0;
};

void validate_stats(const SpectrumStats& s, const std::string& who);

SpectrumStats spectrum_stats(const std::vector<Signal>& targets,
                             const TransformOperator& op);

// The m indices with largest mean magnitude; ties broken toward the lower
// index. Result indices are stored ascending.
ModeSelector topk_selector(const SpectrumStats& stats, int m);

enum class ResidueNorm { L1, L2 };

// Mean over the dataset of the discarded-coefficient residue: per sample,
// sum_{k not in s} |Y_k| (L1) or |Y_k|^2 (L2).
double irreducible_loss(const std::vector<Signal>& targets,
                        const TransformOperator& op, const ModeSelector& s,
                        ResidueNorm norm = ResidueNorm::L2);

struct LossDecomposition {
  double j = 0.0;    // reachable: error on selected modes
  double r_o = 0.0;  // irreducible: target mass on discarded modes
  double l = 0.0;    // j + r_o, the full k-space error
};

// Splits the k-space error of a single-transform model into the reachable
// and irreducible parts. Exact by construction: predictions carry no energy
// outside the selector.
template <typename T>
LossDecomposition decompose_loss(const SpectralModel<T>& model,
                                 const std::vector<Signal>& xs,
                                 const std::vector<Signal>& ys,
                                 ResidueNorm norm = ResidueNorm::L2);

enum class SelectorFamily { Lowpass, TopK };

struct ReconstructionPoint {
  int m = 0;          // per-axis extent; 2-D keeps m*m modes
  double nmse = 0.0;  // mean n-space ||recon - y||^2 / ||y||^2
};

// Truncate-embed-invert reconstruction error of the targets themselves, per
// retention budget. TopK draws its ranking from `stats` and uses the same
// total budget as the low-pass family (m in 1-D, m^2 in 2-D).
std::vector<ReconstructionPoint> reconstruction_curve(
    const std::vector<Signal>& targets, const TransformOperator& op,
    SelectorFamily family, const std::vector<int>& m_values,
    const SpectrumStats* stats = nullptr);

// For each retained mode k, the summed absolute sensitivity of psi_k to the
// discarded coordinates, where psi = T o phi o T^{-1} and derivatives are
// central finite differences with step h_scale * max(1, |X_j|). Requires a
// real-coefficient transform (Dct2), where the spectrum is an unconstrained
// real chart. Returned masses align with s.indices.
std::vector<double> gradient_dependency_mass(
    const std::function<Signal(const Signal&)>& phi,
    const TransformOperator& op, const ModeSelector& s, const Signal& probe,
    double h_scale = 1e-5);

}  // namespace sfdm
