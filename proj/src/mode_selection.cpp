#include "sfdm/mode_selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sfdm {

namespace {

double coeff_abs(const Spectrum& sp, size_t flat) {
  return sp.kind == TransformKind::Dct2 ? std::abs(sp.dct[flat])
                                        : std::abs(sp.dft[flat]);
}

// Marks the selector's indices in a dense membership mask.
std::vector<char> selector_mask(const ModeSelector& s) {
  std::vector<char> mask(s.spectrum_shape.size(), 0);
  for (int idx : s.indices) mask[idx] = 1;
  return mask;
}

void check_dataset(const std::vector<Signal>& targets,
                   const TransformOperator& op, const std::string& who) {
  check_arg(!targets.empty(), who + ": empty dataset");
  for (const Signal& y : targets) {
    validate_signal(y, who);
    check_arg(y.shape == op.shape(), who + ": sample shape mismatch");
  }
}

}  // namespace

void validate_stats(const SpectrumStats& s, const std::string& who) {
  check_arg(s.shape.rows >= 1 && s.shape.cols >= 1, who + ": empty shape");
  check_arg(s.mean_abs.size() == static_cast<size_t>(s.shape.size()),
            who + ": stats extent does not match shape");
  check_arg(s.sample_count >= 1, who + ": sample count must be positive");
  for (double v : s.mean_abs)
    check_arg(std::isfinite(v) && v >= 0.0, who + ": stats must be nonnegative");
}

SpectrumStats spectrum_stats(const std::vector<Signal>& targets,
                             const TransformOperator& op) {
  check_dataset(targets, op, "spectrum_stats");
  const size_t n = static_cast<size_t>(op.shape().size());
  SpectrumStats out;
  out.shape = op.shape();
  out.mean_abs.assign(n, 0.0);
  long long terms = 0;
  for (const Signal& y : targets) {
    Spectrum sp = op.forward(y);
    for (int c = 0; c < y.channels; ++c)
      for (size_t k = 0; k < n; ++k)
        out.mean_abs[k] += coeff_abs(sp, static_cast<size_t>(c) * n + k);
    terms += y.channels;
  }
  for (double& v : out.mean_abs) v /= static_cast<double>(terms);
  out.sample_count = static_cast<int>(targets.size());
  validate_stats(out, "spectrum_stats");
  return out;
}

ModeSelector topk_selector(const SpectrumStats& stats, int m) {
  validate_stats(stats, "topk_selector");
  const int n = stats.shape.size();
  check_arg(m >= 1 && m <= n, "topk_selector: m out of range");
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (stats.mean_abs[a] != stats.mean_abs[b])
      return stats.mean_abs[a] > stats.mean_abs[b];
    return a < b;
  });
  ModeSelector s;
  s.spectrum_shape = stats.shape;
  s.indices.assign(order.begin(), order.begin() + m);
  std::sort(s.indices.begin(), s.indices.end());
  validate_selector(s, "topk_selector");
  return s;
}

double irreducible_loss(const std::vector<Signal>& targets,
                        const TransformOperator& op, const ModeSelector& s,
                        ResidueNorm norm) {
  check_dataset(targets, op, "irreducible_loss");
  validate_selector(s, "irreducible_loss");
  check_arg(s.spectrum_shape == op.shape(), "irreducible_loss: selector shape mismatch");
  const std::vector<char> mask = selector_mask(s);
  const size_t n = mask.size();
  double total = 0.0;
  for (const Signal& y : targets) {
    Spectrum sp = op.forward(y);
    double sample = 0.0;
    for (int c = 0; c < y.channels; ++c)
      for (size_t k = 0; k < n; ++k) {
        if (mask[k]) continue;
        const double a = coeff_abs(sp, static_cast<size_t>(c) * n + k);
        sample += norm == ResidueNorm::L1 ? a : a * a;
      }
    total += sample;
  }
  return total / static_cast<double>(targets.size());
}

template <typename T>
LossDecomposition decompose_loss(const SpectralModel<T>& model,
                                 const std::vector<Signal>& xs,
                                 const std::vector<Signal>& ys,
                                 ResidueNorm norm) {
  check_arg(model.wiring == Wiring::SingleTransform,
            "decompose_loss: requires a model whose prediction is confined to "
            "the selected modes");
  check_arg(!xs.empty() && xs.size() == ys.size(),
            "decompose_loss: dataset must be nonempty and paired");
  const TransformOperator op = model.make_operator();
  const std::vector<char> mask = selector_mask(model.selector);
  const size_t n = mask.size();
  const int m = model.selector.modes();

  auto term = [norm](double a) { return norm == ResidueNorm::L1 ? a : a * a; };

  LossDecomposition out;
  for (size_t i = 0; i < xs.size(); ++i) {
    check_arg(ys[i].channels == model.output_channels(),
              "decompose_loss: target channels mismatch");
    ReducedBlock<T> pred = t1_forward(model, xs[i], op);
    Spectrum ty = op.forward(ys[i]);
    double j = 0.0, r = 0.0;
    for (int c = 0; c < ys[i].channels; ++c) {
      const T* ph = pred.chan(c);
      for (int k = 0; k < m; ++k) {
        const size_t flat =
            static_cast<size_t>(c) * n + model.selector.indices[k];
        if constexpr (std::is_same_v<T, double>)
          j += term(std::abs(ty.dct[flat] - ph[k]));
        else
          j += term(std::abs(ty.dft[flat] - ph[k]));
      }
      for (size_t k = 0; k < n; ++k) {
        if (mask[k]) continue;
        r += term(coeff_abs(ty, static_cast<size_t>(c) * n + k));
      }
    }
    out.j += j;
    out.r_o += r;
  }
  out.j /= static_cast<double>(xs.size());
  out.r_o /= static_cast<double>(xs.size());
  out.l = out.j + out.r_o;
  return out;
}

template LossDecomposition decompose_loss(const SpectralModel<double>&,
                                          const std::vector<Signal>&,
                                          const std::vector<Signal>&,
                                          ResidueNorm);
template LossDecomposition decompose_loss(const SpectralModel<cdouble>&,
                                          const std::vector<Signal>&,
                                          const std::vector<Signal>&,
                                          ResidueNorm);

namespace {

// Reconstruction of one sample through a selector: truncate, embed zeros
// elsewhere, invert. The Dft path discards the imaginary residue, which is
// zero whenever the selector keeps conjugate pairs together.
Signal reconstruct(const Signal& y, const TransformOperator& op,
                   const ModeSelector& s) {
  Spectrum sp = op.forward(y);
  Spectrum emb;
  emb.kind = sp.kind;
  emb.shape = sp.shape;
  emb.channels = sp.channels;
  const size_t n = static_cast<size_t>(sp.shape.size());
  if (sp.kind == TransformKind::Dct2) {
    emb.dct.assign(sp.dct.size(), 0.0);
    for (int c = 0; c < sp.channels; ++c)
      for (int idx : s.indices)
        emb.dct[static_cast<size_t>(c) * n + idx] =
            sp.dct[static_cast<size_t>(c) * n + idx];
  } else {
    emb.dft.assign(sp.dft.size(), cdouble(0.0, 0.0));
    for (int c = 0; c < sp.channels; ++c)
      for (int idx : s.indices)
        emb.dft[static_cast<size_t>(c) * n + idx] =
            sp.dft[static_cast<size_t>(c) * n + idx];
  }
  return op.inverse(emb);
}

}  // namespace

std::vector<ReconstructionPoint> reconstruction_curve(
    const std::vector<Signal>& targets, const TransformOperator& op,
    SelectorFamily family, const std::vector<int>& m_values,
    const SpectrumStats* stats) {
  check_dataset(targets, op, "reconstruction_curve");
  check_arg(!m_values.empty(), "reconstruction_curve: no budgets given");
  if (family == SelectorFamily::TopK) {
    check_arg(stats != nullptr, "reconstruction_curve: TopK needs spectrum stats");
    validate_stats(*stats, "reconstruction_curve");
    check_arg(stats->shape == op.shape(),
              "reconstruction_curve: stats shape mismatch");
  }

  const GridShape shape = op.shape();
  std::vector<ReconstructionPoint> curve;
  for (int m : m_values) {
    ModeSelector s;
    if (family == SelectorFamily::Lowpass) {
      s = lowpass_selector(m, shape);
    } else {
      const int budget = shape.one_dimensional() ? m : m * m;
      s = topk_selector(*stats, budget);
    }
    double acc = 0.0;
    for (const Signal& y : targets) {
      Signal rec = reconstruct(y, op, s);
      double num = 0.0, den = 0.0;
      for (size_t i = 0; i < y.values.size(); ++i) {
        const double d = rec.values[i] - y.values[i];
        num += d * d;
        den += y.values[i] * y.values[i];
      }
      check_runtime(den > 0.0, "reconstruction_curve: zero-norm target");
      acc += num / den;
    }
    curve.push_back({m, acc / static_cast<double>(targets.size())});
  }
  return curve;
}

std::vector<double> gradient_dependency_mass(
    const std::function<Signal(const Signal&)>& phi,
    const TransformOperator& op, const ModeSelector& s, const Signal& probe,
    double h_scale) {
  check_arg(op.kind() == TransformKind::Dct2,
            "gradient_dependency_mass: needs a real-coefficient transform");
  validate_selector(s, "gradient_dependency_mass");
  check_arg(s.spectrum_shape == op.shape(),
            "gradient_dependency_mass: selector shape mismatch");
  validate_signal(probe, "gradient_dependency_mass");
  check_arg(probe.shape == op.shape() && probe.channels == 1,
            "gradient_dependency_mass: probe must be one channel on the grid");
  check_arg(h_scale > 0.0, "gradient_dependency_mass: step must be positive");

  const std::vector<char> mask = selector_mask(s);
  const int n = op.shape().size();
  Spectrum base = op.forward(probe);

  auto psi_retained = [&](const Spectrum& sp) {
    Signal mapped = phi(op.inverse(sp));
    check_runtime(mapped.shape == probe.shape && mapped.channels == 1,
                  "gradient_dependency_mass: map changed the grid");
    for (double v : mapped.values)
      check_runtime(std::isfinite(v),
                    "gradient_dependency_mass: non-finite map output");
    Spectrum out = op.forward(mapped);
    std::vector<double> vals(s.indices.size());
    for (size_t k = 0; k < s.indices.size(); ++k)
      vals[k] = out.dct[s.indices[k]];
    return vals;
  };

  std::vector<double> mass(s.indices.size(), 0.0);
  Spectrum work = base;
  for (int j = 0; j < n; ++j) {
    if (mask[j]) continue;
    const double orig = base.dct[j];
    const double h = h_scale * std::max(1.0, std::abs(orig));
    work.dct[j] = orig + h;
    std::vector<double> plus = psi_retained(work);
    work.dct[j] = orig - h;
    std::vector<double> minus = psi_retained(work);
    work.dct[j] = orig;
    for (size_t k = 0; k < mass.size(); ++k)
      mass[k] += std::abs((plus[k] - minus[k]) / (2.0 * h));
  }
  return mass;
}

}  // namespace sfdm
