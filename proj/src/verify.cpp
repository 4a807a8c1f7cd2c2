#include "sfdm/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "sfdm/bench.hpp"
#include "sfdm/data.hpp"
#include "sfdm/init.hpp"
#include "sfdm/kspace.hpp"
#include "sfdm/layers.hpp"
#include "sfdm/mode_selection.hpp"
#include "sfdm/rng.hpp"
#include "sfdm/training.hpp"

namespace sfdm {
namespace {

constexpr double kPi = 3.14159265358979323846;

PropertyResult make_result(const char* module, const char* name,
                           double observed, double bound,
                           std::string detail = "") {
  PropertyResult r;
  r.module = module;
  r.name = name;
  r.observed = observed;
  r.bound = bound;
  r.pass = observed <= bound;
  r.detail = std::move(detail);
  return r;
}

Signal random_signal(GridShape shape, RandomStream& rs, int channels = 1) {
  Signal x(shape, channels);
  for (double& v : x.values) v = rs.gaussian();
  return x;
}

double rel_l2(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

// Definitional O(N^2) sums, independent of the FFT kernels.
std::vector<cdouble> raw_dft_sums(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<cdouble> out(n);
  for (int k = 0; k < n; ++k) {
    double re = 0.0, im = 0.0;
    for (int j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * k * j / n;
      re += x[j] * std::cos(ang);
      im += x[j] * std::sin(ang);
    }
    out[k] = cdouble(re, im);
  }
  return out;
}

std::vector<double> raw_dct2_sums(const std::vector<double>& x) {
  const int n = static_cast<int>(x.size());
  std::vector<double> out(n);
  for (int k = 0; k < n; ++k) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += x[j] * std::cos(kPi * (2 * j + 1) * k / (2.0 * n));
    out[k] = std::sqrt((k == 0 ? 1.0 : 2.0) / n) * acc;
  }
  return out;
}

// --- transforms -------------------------------------------------------------

void transforms_checks(RandomStream root, std::vector<PropertyResult>& out) {
  const std::vector<GridShape> shapes = {
      GridShape::one_d(2),   GridShape::one_d(3),  GridShape::one_d(8),
      GridShape::one_d(17),  GridShape::one_d(64), GridShape::one_d(256),
      GridShape::one_d(1024), GridShape::two_d(8, 8), GridShape::two_d(16, 12)};
  const TransformKind kinds[] = {TransformKind::Dct2, TransformKind::Dft};

  {
    RandomStream rs = root.substream(1);
    double worst = 0.0;
    for (TransformKind kind : kinds)
      for (GridShape shape : shapes) {
        TransformOperator op(kind, shape);
        Signal x = random_signal(shape, rs);
        Signal back = op.inverse(op.forward(x));
        worst = std::max(worst, rel_l2(back.values, x.values));
      }
    out.push_back(make_result("transforms", "roundtrip", worst, 1e-10));
  }
  {
    RandomStream rs = root.substream(2);
    PropertyResult acc = make_result("transforms", "parseval", 0.0, 1e-10);
    for (TransformKind kind : kinds)
      for (GridShape shape : {GridShape::one_d(64), GridShape::one_d(1024),
                              GridShape::two_d(16, 12)}) {
        TransformOperator op(kind, shape);
        SpectrumMap map = [&op, shape](const std::vector<double>& v) {
          Signal x(shape);
          x.values = v;
          Spectrum X = op.forward(x);
          if (X.kind == TransformKind::Dft) return X.dft;
          std::vector<cdouble> z(X.dct.size());
          for (size_t i = 0; i < X.dct.size(); ++i) z[i] = X.dct[i];
          return z;
        };
        PropertyResult r =
            check_parseval_map(map, shape, 8, rs.next_u64(), 1e-10);
        acc.observed = std::max(acc.observed, r.observed);
        acc.pass = acc.pass && r.pass;
      }
    out.push_back(acc);
  }
  {
    RandomStream rs = root.substream(3);
    double worst = 0.0;
    for (TransformKind kind : kinds)
      for (GridShape shape : {GridShape::one_d(48), GridShape::two_d(8, 8)}) {
        TransformOperator op(kind, shape);
        Signal x = random_signal(shape, rs), y = random_signal(shape, rs);
        const double a = rs.gaussian(), b = rs.gaussian();
        Signal z(shape);
        for (size_t i = 0; i < z.values.size(); ++i)
          z.values[i] = a * x.values[i] + b * y.values[i];
        Spectrum X = op.forward(x), Y = op.forward(y), Z = op.forward(z);
        double num = 0.0, den = 0.0;
        const size_t count = shape.size();
        for (size_t i = 0; i < count; ++i) {
          cdouble want = kind == TransformKind::Dft
                             ? a * X.dft[i] + b * Y.dft[i]
                             : cdouble(a * X.dct[i] + b * Y.dct[i]);
          cdouble got = kind == TransformKind::Dft ? Z.dft[i] : cdouble(Z.dct[i]);
          num += std::norm(got - want);
          den += std::norm(want);
        }
        worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
      }
    out.push_back(make_result("transforms", "linearity", worst, 1e-10));
  }
  {
    RandomStream rs = root.substream(4);
    double worst = 0.0;
    for (int n : {2, 3, 4, 5, 8, 12, 16, 31, 32, 48, 64}) {
      GridShape shape = GridShape::one_d(n);
      Signal x = random_signal(shape, rs);
      {
        TransformOperator op(TransformKind::Dct2, shape);
        std::vector<double> want = raw_dct2_sums(x.values);
        worst = std::max(worst, rel_l2(op.forward(x).dct, want));
      }
      {
        TransformOperator op(TransformKind::Dft, shape);
        std::vector<cdouble> want = raw_dft_sums(x.values);
        Spectrum X = op.forward(x);
        double num = 0.0, den = 0.0;
        for (int k = 0; k < n; ++k) {
          num += std::norm(X.dft[k] - want[k] / std::sqrt(double(n)));
          den += std::norm(want[k]) / n;
        }
        worst = std::max(worst, std::sqrt(num / std::max(den, 1e-300)));
      }
    }
    out.push_back(make_result("transforms", "fft_matches_definition", worst, 1e-9));
  }
  {
    double worst = 0.0;
    for (int n = 2; n <= 64; ++n)
      for (int k = 1; k < n; ++k) {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += std::cos(2.0 * kPi * k * j / n);
        worst = std::max(worst, std::abs(s));
      }
    out.push_back(make_result("transforms", "cosine_series_sums_to_zero", worst, 1e-9));
  }
  {
    // Valid domain: 2k != 0 (mod N). At k = N/2 every term is 1 and the sum
    // is N, so that frequency is excluded.
    double worst = 0.0;
    for (int n = 2; n <= 64; ++n)
      for (int k = 1; k < n; ++k) {
        if ((2 * k) % n == 0) continue;
        double s = 0.0;
        for (int j = 0; j < n; ++j) {
          const double c = std::cos(2.0 * kPi * k * j / n);
          s += c * c;
        }
        worst = std::max(worst, std::abs(s - 0.5 * n));
      }
    out.push_back(make_result("transforms", "squared_cosine_series_half_n", worst, 1e-9));
  }
  {
    // Forward factor f on the raw sums gives per-coefficient variance f^2 N
    // under unit-variance inputs: 1/N for f=1/N, N for f=1, 1 for f=1/sqrt(N).
    RandomStream rs = root.substream(5);
    const int n = 256, samples = 400;
    double raw_power = 0.0;
    std::vector<double> x(n);
    for (int s = 0; s < samples; ++s) {
      for (double& v : x) v = rs.gaussian();
      std::vector<cdouble> raw = raw_dft_sums(x);
      for (const cdouble& z : raw) raw_power += std::norm(z);
    }
    raw_power /= static_cast<double>(samples) * n;  // E|S_k|^2, expect N
    const double conv[3] = {1.0 / n, 1.0, 1.0 / std::sqrt(double(n))};
    const double want[3] = {1.0 / n, double(n), 1.0};
    double worst = 0.0;
    std::ostringstream detail;
    for (int i = 0; i < 3; ++i) {
      const double measured = conv[i] * conv[i] * raw_power;
      worst = std::max(worst, std::abs(measured / want[i] - 1.0));
      detail << (i ? " " : "") << "f" << i << "=" << fmt(measured);
    }
    out.push_back(make_result("transforms", "normalization_convention_variance",
                              worst, 0.1, detail.str()));
  }
}

// --- initialization ---------------------------------------------------------

void initialization_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    // Total second moment is preserved through either transform.
    RandomStream rs = root.substream(1);
    const int n = 256, samples = 40000;
    double worst = 0.0;
    for (TransformKind kind : {TransformKind::Dct2, TransformKind::Dft}) {
      TransformOperator op(kind, GridShape::one_d(n));
      double in_sq = 0.0, out_sq = 0.0;
      for (int s = 0; s < samples; ++s) {
        Signal x = random_signal(GridShape::one_d(n), rs);
        for (double v : x.values) in_sq += v * v;
        out_sq += std::pow(spectrum_norm(op.forward(x)), 2);
      }
      worst = std::max(worst, std::abs(out_sq / in_sq - 1.0));
    }
    out.push_back(make_result("initialization", "total_variance_preserved", worst, 0.05));
  }
  {
    // Scatter after truncation leaves every discarded slot exactly zero.
    RandomStream rs = root.substream(2);
    const int n = 32, m = 6;
    ModeSelector sel = lowpass_selector(m, GridShape::one_d(n));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
      std::vector<double> spectrum(n);
      for (double& v : spectrum) v = rs.gaussian();
      std::vector<double> xm = truncate_modes(spectrum, sel);
      std::vector<double> ym(m, 0.0);
      for (int k = 0; k < m; ++k)
        for (int j = 0; j < m; ++j) ym[k] += rs.gaussian(0.8) * xm[j];
      std::vector<double> full = embed_modes(ym, sel);
      for (int i = m; i < n; ++i) worst = std::max(worst, std::abs(full[i]));
    }
    out.push_back(make_result("initialization", "truncation_zeroes_tail", worst, 0.0));
  }
  {
    // Dense map on m kept coefficients: per-coordinate output variance is
    // m*sigma^2*sigma_a^2 for real entries, 2x that for complex entries.
    RandomStream rs = root.substream(3);
    const int m = 8, samples = 200000;
    const double sigma = 1.3, sigma_a = 0.7;
    std::vector<double> var_re(m, 0.0), var_cx(m, 0.0);
    std::vector<double> xm(m);
    for (int s = 0; s < samples; ++s) {
      for (double& v : xm) v = rs.gaussian(sigma);
      for (int k = 0; k < m; ++k) {
        double acc_re = 0.0;
        cdouble acc_cx(0.0, 0.0);
        for (int j = 0; j < m; ++j) {
          acc_re += rs.gaussian(sigma_a) * xm[j];
          acc_cx += cdouble(rs.gaussian(sigma_a), rs.gaussian(sigma_a)) * xm[j];
        }
        var_re[k] += acc_re * acc_re;
        var_cx[k] += std::norm(acc_cx);
      }
    }
    const double want = m * sigma * sigma * sigma_a * sigma_a;
    double worst_re = 0.0, worst_cx = 0.0;
    for (int k = 0; k < m; ++k) {
      worst_re = std::max(worst_re, std::abs(var_re[k] / samples / want - 1.0));
      worst_cx = std::max(worst_cx, std::abs(var_cx[k] / samples / (2.0 * want) - 1.0));
    }
    out.push_back(make_result("initialization", "truncated_layer_variance_real",
                              worst_re, 0.05));
    out.push_back(make_result("initialization", "truncated_layer_variance_complex",
                              worst_cx, 0.05));
  }
  {
    const std::uint64_t s = root.substream(4).seed();
    KSpaceWeights<double> a = sample_vp_dense_dct(256, 24, s);
    KSpaceWeights<double> b = sample_vp_dense_dct(256, 24, s);
    const bool same = a.values.size() == b.values.size() &&
                      std::memcmp(a.values.data(), b.values.data(),
                                  a.values.size() * sizeof(double)) == 0;
    out.push_back(make_result("initialization", "seed_determinism", same ? 0.0 : 1.0, 0.0));
  }
  {
    RandomStream rs = root.substream(5);
    PropertyResult dense = check_dense_variance_ratio(
        TransformKind::Dct2, 256, 24, vp_dense_variance(256, 24), 1500, 25,
        rs.next_u64());
    dense.module = "initialization";
    dense.name = "vp_ratio_dense";
    out.push_back(dense);

    PropertyResult dft = check_dense_variance_ratio(
        TransformKind::Dft, 256, 24, vp_dense_component_variance_dft(256, 24),
        1500, 25, rs.next_u64());
    dft.module = "initialization";
    dft.name = "vp_ratio_dense_dft";
    out.push_back(dft);

    InitScheme diag{InitFamily::VpDiagonal, TransformKind::Dct2, 256, 24,
                    rs.next_u64()};
    VarianceProbeReport rep = variance_probe(diag, 1500, 25);
    out.push_back(make_result("initialization", "vp_ratio_diagonal",
                              std::abs(rep.mean_ratio - 1.0), 0.1,
                              "mean_ratio=" + fmt(rep.mean_ratio)));
  }
  {
    // With m fixed, the vp ratio stays near 1 across resolutions while the
    // Xavier ratio collapses monotonically.
    RandomStream rs = root.substream(6);
    const int m = 24, batch = 800, draws = 15;
    double worst_vp = 0.0;
    std::vector<double> xavier_ratios;
    std::ostringstream detail;
    for (int n : {128, 256, 512, 1024}) {
      InitScheme vp{InitFamily::VpDense, TransformKind::Dct2, n, m, rs.next_u64()};
      worst_vp = std::max(worst_vp,
                          std::abs(variance_probe(vp, batch, draws).mean_ratio - 1.0));
      InitScheme xav{InitFamily::Xavier, TransformKind::Dct2, n, m, rs.next_u64()};
      xavier_ratios.push_back(variance_probe(xav, batch, draws).mean_ratio);
      detail << "N" << n << "=" << fmt(xavier_ratios.back()) << " ";
    }
    out.push_back(make_result("initialization", "vp_ratio_across_resolutions",
                              worst_vp, 0.1));
    bool decreasing = true;
    for (size_t i = 1; i < xavier_ratios.size(); ++i)
      decreasing = decreasing && xavier_ratios[i] < xavier_ratios[i - 1];
    PropertyResult r = make_result("initialization", "xavier_ratio_collapse",
                                   xavier_ratios.back(), 0.1, detail.str());
    r.pass = r.pass && decreasing;
    out.push_back(r);
  }
}

// --- layers -----------------------------------------------------------------

ModelConfig small_model_config(TransformKind kind, Wiring wiring, int n, int m,
                               int depth, std::uint64_t seed) {
  ModelConfig cfg;
  cfg.kind = kind;
  cfg.wiring = wiring;
  cfg.shape = GridShape::one_d(n);
  cfg.modes_per_axis = m;
  cfg.depth = depth;
  cfg.width = 2;
  cfg.seed = seed;
  return cfg;
}

void layers_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    RandomStream rs = root.substream(1);
    Signal x = random_signal(GridShape::one_d(64), rs);
    auto t1 = std::get<DctModel>(build_model(
        small_model_config(TransformKind::Dct2, Wiring::SingleTransform, 64, 8, 4, 11)));
    auto fno = std::get<DctModel>(build_model(
        small_model_config(TransformKind::Dct2, Wiring::PerLayer, 64, 8, 4, 11)));
    auto [tf, ti] = count_transforms(t1, x, true);
    auto [kf, ki] = count_transforms(t1, x, false);
    auto [ff, fi] = count_transforms(fno, x, true);
    const double dev = std::abs(tf - 1.0) + std::abs(ti - 1.0) + std::abs(kf - 1.0) +
                       std::abs(double(ki)) + std::abs(ff - 4.0) + std::abs(fi - 4.0);
    out.push_back(make_result("layers", "transform_counts", dev, 0.0,
                              "t1=(1,1) kspace=(1,0) per_layer=(4,4)"));
  }
  {
    // With bias and activation off the whole stack is linear; the map
    // materialized column-by-column must reproduce every forward.
    RandomStream rs = root.substream(2);
    double worst = 0.0;
    for (TransformKind kind : {TransformKind::Dct2, TransformKind::Dft}) {
      ModelConfig cfg = small_model_config(kind, Wiring::SingleTransform, 8, 4, 2, 17);
      cfg.bias = false;
      cfg.hidden_activation = Activation::None;
      cfg.width = 1;
      AnyModel any = build_model(cfg);
      auto run = [&](const Signal& v) {
        return std::visit(
            [&](const auto& model) {
              TransformOperator op = model.make_operator();
              return predict_signal(model, v, op);
            },
            any);
      };
      const int n = 8;
      std::vector<std::vector<double>> columns(n);
      for (int j = 0; j < n; ++j) {
        Signal e(GridShape::one_d(n));
        e.values[j] = 1.0;
        columns[j] = run(e).values;
      }
      for (int t = 0; t < 5; ++t) {
        Signal x = random_signal(GridShape::one_d(n), rs);
        std::vector<double> want(n, 0.0);
        for (int j = 0; j < n; ++j)
          for (int i = 0; i < n; ++i) want[i] += columns[j][i] * x.values[j];
        worst = std::max(worst, rel_l2(run(x).values, want));
      }
    }
    out.push_back(make_result("layers", "dense_pipeline_equivalence", worst, 1e-9));
  }
  {
    RandomStream rs = root.substream(3);
    ModeSelector sel = lowpass_selector(5, GridShape::one_d(16));
    std::vector<double> spectrum(16);
    for (double& v : spectrum) v = rs.gaussian();
    std::vector<double> once = embed_modes(truncate_modes(spectrum, sel), sel);
    std::vector<double> twice = embed_modes(truncate_modes(once, sel), sel);
    double worst = 0.0;
    for (int i = 0; i < 16; ++i) worst = std::max(worst, std::abs(twice[i] - once[i]));
    out.push_back(make_result("layers", "truncation_idempotent", worst, 0.0));
  }
  {
    // Conjugate-symmetric embedding keeps the inverse field real.
    RandomStream rs = root.substream(4);
    ModelConfig cfg = small_model_config(TransformKind::Dft, Wiring::SingleTransform,
                                         32, 8, 2, 23);
    cfg.width = 1;
    auto model = std::get<DftModel>(build_model(cfg));
    TransformOperator op = model.make_operator();
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      Signal x = random_signal(GridShape::one_d(32), rs);
      ReducedBlock<cdouble> z = t1_forward(model, x, op);
      Spectrum full;
      full.kind = TransformKind::Dft;
      full.shape = model.shape;
      full.dft = embed_conjugate_symmetric(z.v, model.selector);
      std::vector<cdouble> field = op.inverse_complex(full);
      double norm = 0.0, imag = 0.0;
      for (const cdouble& v : field) {
        norm += std::norm(v);
        imag = std::max(imag, std::abs(v.imag()));
      }
      worst = std::max(worst, imag / std::max(std::sqrt(norm), 1e-300));
    }
    out.push_back(make_result("layers", "dft_output_imag_residue", worst, 1e-9));
  }
}

// --- mode_selection ----------------------------------------------------------

void mode_selection_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    // Per-spectrum optimality: the ranking statistic and the residue are
    // computed from the same spectrum, so keeping the m largest magnitudes
    // minimizes the discarded sum under either norm.
    RandomStream rs = root.substream(1);
    double worst = 0.0;
    for (int n : {6, 10})
      for (int m : {2, 3}) {
        TransformOperator op(TransformKind::Dct2, GridShape::one_d(n));
        for (int trial = 0; trial < 20; ++trial) {
          std::vector<Signal> one{random_signal(GridShape::one_d(n), rs)};
          SpectrumStats stats = spectrum_stats(one, op);
          ModeSelector top = topk_selector(stats, m);
          for (ResidueNorm norm : {ResidueNorm::L1, ResidueNorm::L2}) {
            const double top_loss = irreducible_loss(one, op, top, norm);
            std::vector<bool> mask(n, false);
            std::fill(mask.begin(), mask.begin() + m, true);
            std::sort(mask.begin(), mask.end());
            double best = top_loss;
            do {
              ModeSelector s;
              s.spectrum_shape = GridShape::one_d(n);
              for (int i = 0; i < n; ++i)
                if (mask[i]) s.indices.push_back(i);
              best = std::min(best, irreducible_loss(one, op, s, norm));
            } while (std::next_permutation(mask.begin(), mask.end()));
            worst = std::max(worst, top_loss - best);
          }
        }
      }
    out.push_back(make_result("mode_selection", "topk_exhaustive_optimal", worst, 1e-12));
  }
  {
    const int n = 12, m = 5;
    SpectrumStats stats;
    stats.shape = GridShape::one_d(n);
    stats.sample_count = 1;
    for (int k = 0; k < n; ++k) stats.mean_abs.push_back(double(n - k));
    ModeSelector top = topk_selector(stats, m);
    ModeSelector low = lowpass_selector(m, GridShape::one_d(n));
    const bool same = top.indices == low.indices;
    out.push_back(make_result("mode_selection", "monotone_topk_is_lowpass",
                              same ? 0.0 : 1.0, 0.0));
  }
  {
    RandomStream rs = root.substream(2);
    double worst_add = 0.0, worst_direct = 0.0;
    for (TransformKind kind : {TransformKind::Dct2, TransformKind::Dft}) {
      ModelConfig cfg = small_model_config(kind, Wiring::SingleTransform, 16, 5, 2, 31);
      AnyModel any = build_model(cfg);
      std::vector<Signal> xs, ys;
      for (int s = 0; s < 8; ++s) {
        xs.push_back(random_signal(GridShape::one_d(16), rs));
        ys.push_back(random_signal(GridShape::one_d(16), rs));
      }
      auto eval = [&](const auto& model) {
        using Model = std::decay_t<decltype(model)>;
        LossDecomposition d = decompose_loss(model, xs, ys);
        worst_add = std::max(worst_add, std::abs(d.l - (d.j + d.r_o)));
        TransformOperator op = model.make_operator();
        double direct = 0.0;
        for (size_t s = 0; s < xs.size(); ++s) {
          auto z = t1_forward(model, xs[s], op);
          auto full = embed_modes(z.v, model.selector);
          Spectrum Y = op.forward(ys[s]);
          double acc = 0.0;
          for (int k = 0; k < 16; ++k) {
            if constexpr (std::is_same_v<Model, DctModel>)
              acc += (full[k] - Y.dct[k]) * (full[k] - Y.dct[k]);
            else
              acc += std::norm(full[k] - Y.dft[k]);
          }
          direct += acc;
        }
        direct /= static_cast<double>(xs.size());
        worst_direct = std::max(worst_direct,
                                std::abs(direct - d.l) / std::max(d.l, 1e-15));
      };
      std::visit(eval, any);
    }
    out.push_back(make_result("mode_selection", "decomposition_additive", worst_add, 1e-12));
    out.push_back(make_result("mode_selection", "decomposition_matches_direct",
                              worst_direct, 1e-9));
  }
  {
    RandomStream rs = root.substream(3);
    double worst = 0.0;
    {
      TransformOperator op(TransformKind::Dct2, GridShape::one_d(12));
      std::vector<Signal> ys;
      for (int s = 0; s < 6; ++s) ys.push_back(random_signal(GridShape::one_d(12), rs));
      auto curve = reconstruction_curve(ys, op, SelectorFamily::Lowpass, {12});
      worst = std::max(worst, curve[0].nmse);
    }
    {
      TransformOperator op(TransformKind::Dft, GridShape::two_d(8, 8));
      std::vector<Signal> ys;
      for (int s = 0; s < 4; ++s) ys.push_back(random_signal(GridShape::two_d(8, 8), rs));
      auto curve = reconstruction_curve(ys, op, SelectorFamily::Lowpass, {8});
      worst = std::max(worst, curve[0].nmse);
    }
    out.push_back(make_result("mode_selection", "full_reconstruction_exact", worst, 1e-10));
  }
}

// --- training ----------------------------------------------------------------

template <typename T>
double fd_worst_margin(SpectralModel<T>& model, const std::vector<Signal>& xs,
                       const std::vector<Signal>& ys) {
  TransformOperator op = model.make_operator();
  std::vector<const Signal*> xp, yp;
  for (const Signal& x : xs) xp.push_back(&x);
  for (const Signal& y : ys) yp.push_back(&y);

  ModelGrads<T> grads;
  grads.init_like(model);
  grads.zero();
  batch_loss_and_grads(model, op, xp, yp, grads);
  auto pbufs = parameter_buffers(model);
  auto gbufs = grads.buffers();

  ModelGrads<T> scratch;
  scratch.init_like(model);
  double worst = 0.0;
  for (size_t b = 0; b < pbufs.size(); ++b)
    for (size_t i = 0; i < pbufs[b].second; ++i) {
      double& p = pbufs[b].first[i];
      const double orig = p;
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      p = orig + h;
      scratch.zero();
      const double lp = batch_loss_and_grads(model, op, xp, yp, scratch);
      p = orig - h;
      scratch.zero();
      const double lm = batch_loss_and_grads(model, op, xp, yp, scratch);
      p = orig;
      const double num = (lp - lm) / (2.0 * h);
      const double ana = gbufs[b].first[i];
      const double margin = 1e-5 * std::max(std::abs(num), std::abs(ana)) + 1e-7;
      worst = std::max(worst, std::abs(num - ana) / margin);
    }
  return worst;
}

void training_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    // At full spectrum the k-space and n-space objectives coincide.
    RandomStream rs = root.substream(1);
    double worst = 0.0;
    for (TransformKind kind : {TransformKind::Dct2, TransformKind::Dft}) {
      ModelConfig cfg = small_model_config(kind, Wiring::SingleTransform, 12,
                                           kind == TransformKind::Dft ? 6 : 12, 1, 41);
      cfg.width = 1;
      cfg.hidden_activation = Activation::None;
      AnyModel any = build_model(cfg);
      // Dft keeps per-axis frequencies <= N/2; full-spectrum equivalence is
      // exercised on the real-coefficient transform, where m = N is legal.
      if (kind == TransformKind::Dft) continue;
      auto& model = std::get<DctModel>(any);
      TransformOperator op = model.make_operator();
      std::vector<std::vector<double>> kp, kt;
      std::vector<std::vector<double>> np, nt;
      for (int s = 0; s < 6; ++s) {
        Signal x = random_signal(GridShape::one_d(12), rs);
        Signal y = random_signal(GridShape::one_d(12), rs);
        kp.push_back(t1_forward(model, x, op).v);
        kt.push_back(signal_to_reduced<double>(y, model.selector, op).v);
        np.push_back(t1_predict_signal(model, x, op).values);
        nt.push_back(y.values);
      }
      const double k_loss = relative_l2_loss(kp, kt);
      const double n_loss = relative_l2_loss(np, nt);
      worst = std::max(worst, std::abs(k_loss - n_loss) / std::max(n_loss, 1e-300));
    }
    out.push_back(make_result("training", "kspace_nspace_objective_equal", worst, 1e-10));
  }
  {
    RandomStream rs = root.substream(2);
    double worst = 0.0;
    struct Case {
      TransformKind kind;
      Wiring wiring;
      Activation act;
    };
    const Case cases[] = {
        {TransformKind::Dct2, Wiring::SingleTransform, Activation::Gelu},
        {TransformKind::Dft, Wiring::SingleTransform, Activation::Gelu},
        {TransformKind::Dct2, Wiring::PerLayer, Activation::Gelu},
        {TransformKind::Dft, Wiring::PerLayer, Activation::None},
    };
    int label = 0;
    for (const Case& c : cases) {
      ModelConfig cfg = small_model_config(c.kind, c.wiring, 8, 3, 2, 43 + label++);
      cfg.hidden_activation = c.act;
      AnyModel any = build_model(cfg);
      std::vector<Signal> xs, ys;
      for (int s = 0; s < 2; ++s) {
        xs.push_back(random_signal(GridShape::one_d(8), rs));
        ys.push_back(random_signal(GridShape::one_d(8), rs));
      }
      std::visit([&](auto& model) { worst = std::max(worst, fd_worst_margin(model, xs, ys)); },
                 any);
    }
    out.push_back(make_result("training", "gradients_match_fd", worst, 1.0,
                              "margin-normalized central differences"));
  }
  {
    // Two identical runs produce bitwise-identical parameters; the trained
    // truncating model can never beat the truncation residue of the targets.
    GeneratorConfig dcfg;
    dcfg.kind = GeneratorKind::Burgers1d;
    dcfg.resolution = 32;
    dcfg.viscosity = 0.05;
    dcfg.horizon = 0.4;
    dcfg.count = 16;
    dcfg.seed = root.substream(3).seed();
    dcfg.train_fraction = 0.75;
    dcfg.val_fraction = 0.125;
    Dataset ds = generate_dataset(dcfg);
    std::vector<Signal> tx = ds.inputs(Split::Train), ty = ds.targets(Split::Train);
    std::vector<Signal> vx = ds.inputs(Split::Val), vy = ds.targets(Split::Val);

    ModelConfig mc = small_model_config(TransformKind::Dct2, Wiring::SingleTransform,
                                        32, 8, 2, 47);
    mc.width = 4;
    TrainConfig tc;
    tc.epochs = 25;
    tc.batch_size = 8;
    tc.schedule = {0.01, 0, 1.0};
    tc.shuffle_seed = 5;

    auto run_once = [&]() {
      auto model = std::get<DctModel>(build_model(mc));
      train_model(model, tx, ty, vx, vy, tc);
      return model;
    };
    DctModel a = run_once();
    DctModel b = run_once();
    long long mismatched = 0;
    auto pa = parameter_buffers(a), pb = parameter_buffers(b);
    for (size_t i = 0; i < pa.size(); ++i)
      if (std::memcmp(pa[i].first, pb[i].first, pa[i].second * sizeof(double)) != 0)
        ++mismatched;
    out.push_back(make_result("training", "training_determinism",
                              static_cast<double>(mismatched), 0.0));

    TransformOperator op = a.make_operator();
    const double model_nmse = evaluate_nspace(a, tx, ty);
    const double floor_nmse =
        reconstruction_curve(ty, op, SelectorFamily::Lowpass, {8})[0].nmse;
    out.push_back(make_result("training", "loss_above_truncation_bound",
                              floor_nmse - model_nmse, 1e-12,
                              "model=" + fmt(model_nmse) + " floor=" + fmt(floor_nmse)));
  }
}

// --- data ----------------------------------------------------------------------

void data_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    // heat_solution against brute-force RK4 integration of the per-mode ODE.
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Heat2d;
    cfg.resolution = 16;
    cfg.seed = root.substream(1).seed();
    Signal x0 = sample_initial_condition(cfg, 0);
    const double nu = 0.01, T = 1.0;
    Signal exact = heat_solution(x0, nu, T);

    const int n = 16, steps = 2000;
    TransformOperator op(TransformKind::Dft, GridShape::two_d(n, n));
    Spectrum U = op.forward(x0);
    const double dt = T / steps;
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        const int kr = r <= n / 2 ? r : r - n;
        const int kc = c <= n / 2 ? c : c - n;
        const double lam = -nu * (kr * kr + kc * kc);
        const double z = lam * dt;
        const double factor = 1.0 + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
        cdouble& u = U.dft[static_cast<size_t>(r) * n + c];
        for (int s = 0; s < steps; ++s) u *= factor;
      }
    Signal integrated = op.inverse(U);
    out.push_back(make_result("data", "heat_matches_ode_integration",
                              rel_l2(integrated.values, exact.values), 1e-8));
  }
  {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 32;
    cfg.viscosity = 0.05;
    cfg.horizon = 0.5;
    cfg.count = 5;
    cfg.seed = root.substream(2).seed();
    Dataset ds = generate_dataset(cfg);
    double worst = 0.0;
    for (const DatasetPair& p : ds.pairs)
      worst = std::max(worst, l2_norm(p.y.values) / l2_norm(p.x.values) - 1.0);
    out.push_back(make_result("data", "burgers_energy_dissipates", worst, 1e-12));
  }
  {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 32;
    cfg.viscosity = 0.05;
    cfg.horizon = 0.3;
    cfg.count = 6;
    cfg.seed = root.substream(3).seed();
    Dataset ds = generate_dataset(cfg);
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() /
                   ("sfdm-verify-" + hex64(root.substream(4).next_u64()));
    fs::create_directories(dir);
    const std::string stem = (dir / "ds").string();
    long long mismatched = 0;
    try {
      save_dataset(ds, stem);
      Dataset back = load_dataset(stem);
      if (back.pairs.size() != ds.pairs.size()) {
        mismatched = 1;
      } else {
        for (size_t i = 0; i < ds.pairs.size(); ++i) {
          const auto& a = ds.pairs[i];
          const auto& b = back.pairs[i];
          if (std::memcmp(a.x.values.data(), b.x.values.data(),
                          a.x.values.size() * sizeof(double)) != 0 ||
              std::memcmp(a.y.values.data(), b.y.values.data(),
                          a.y.values.size() * sizeof(double)) != 0)
            ++mismatched;
        }
      }
    } catch (...) {
      fs::remove_all(dir);
      throw;
    }
    fs::remove_all(dir);
    out.push_back(make_result("data", "dataset_roundtrip_bitexact",
                              static_cast<double>(mismatched), 0.0));
  }
}

// --- bench ---------------------------------------------------------------------

void bench_checks(RandomStream root, std::vector<PropertyResult>& out) {
  {
    // At depth 1, full spectrum, no activation or skip, both wirings execute
    // the same arithmetic.
    RandomStream rs = root.substream(1);
    ModelConfig cfg = small_model_config(TransformKind::Dct2, Wiring::SingleTransform,
                                         32, 32, 1, 53);
    cfg.width = 1;
    cfg.hidden_activation = Activation::None;
    cfg.residual = false;
    auto t1 = std::get<DctModel>(build_model(cfg));
    cfg.wiring = Wiring::PerLayer;
    auto fno = std::get<DctModel>(build_model(cfg));
    TransformOperator op = t1.make_operator();
    double worst = 0.0;
    for (int t = 0; t < 5; ++t) {
      Signal x = random_signal(GridShape::one_d(32), rs);
      worst = std::max(worst, rel_l2(predict_signal(fno, x, op).values,
                                     predict_signal(t1, x, op).values));
    }
    out.push_back(make_result("bench", "wirings_agree_at_full_spectrum", worst, 1e-12));
  }
  {
    // Workload sized so per-rep time dominates timer noise on a busy core.
    BenchGrid grid;
    grid.depths = {4};
    grid.widths = {8};
    grid.resolutions = {128};
    grid.modes_per_axis = 16;
    grid.repetitions = 25;
    grid.warmup = 3;
    grid.seed = root.substream(2).seed();
    const double s1 = run_speedup_grid(grid, TransformKind::Dct2).cells[0].speedup;
    const double s2 = run_speedup_grid(grid, TransformKind::Dct2).cells[0].speedup;
    PropertyResult r = make_result("bench", "speedup_stable_across_runs",
                                   std::abs(s1 - s2) / std::min(s1, s2), 0.3,
                                   "s1=" + fmt(s1) + " s2=" + fmt(s2));
    r.timing = true;
    out.push_back(r);
  }
}

using ModuleFn = void (*)(RandomStream, std::vector<PropertyResult>&);

struct ModuleEntry {
  const char* name;
  std::uint64_t label;
  ModuleFn fn;
};

const ModuleEntry kModules[] = {
    {"transforms", 0x7101, transforms_checks},
    {"initialization", 0x7102, initialization_checks},
    {"layers", 0x7103, layers_checks},
    {"mode_selection", 0x7104, mode_selection_checks},
    {"training", 0x7105, training_checks},
    {"data", 0x7106, data_checks},
    {"bench", 0x7107, bench_checks},
};

}  // namespace

bool VerifyReport::all_pass() const {
  for (const PropertyResult& r : results)
    if (!r.pass) return false;
  return true;
}

std::vector<std::string> verify_module_names() {
  std::vector<std::string> names;
  for (const ModuleEntry& m : kModules) names.push_back(m.name);
  return names;
}

VerifyReport run_property_suite(std::uint64_t seed,
                                const std::vector<std::string>& modules) {
  for (const std::string& want : modules) {
    bool known = false;
    for (const ModuleEntry& m : kModules) known = known || want == m.name;
    check_arg(known, "run_property_suite: unknown module '" + want + "'");
  }
  VerifyReport report;
  report.seed = seed;
  RandomStream root(seed);
  for (const ModuleEntry& m : kModules) {
    if (!modules.empty() &&
        std::find(modules.begin(), modules.end(), m.name) == modules.end())
      continue;
    m.fn(root.substream(m.label), report.results);
  }
  return report;
}

void write_verify_json(const VerifyReport& r, std::ostream& out) {
  nlohmann::json results = nlohmann::json::array();
  for (const PropertyResult& p : r.results) {
    nlohmann::json row;
    row["module"] = p.module;
    row["name"] = p.name;
    row["pass"] = p.pass;
    row["bound"] = p.bound;
    if (!p.timing) {
      row["observed"] = p.observed;
      if (!p.detail.empty()) row["detail"] = p.detail;
    } else {
      row["timing_dependent"] = true;
    }
    results.push_back(row);
  }
  nlohmann::json j;
  j["seed"] = r.seed;
  j["all_pass"] = r.all_pass();
  j["results"] = results;
  out << j.dump(2) << "\n";
}

void print_verify_report(const VerifyReport& r, std::ostream& out) {
  for (const PropertyResult& p : r.results) {
    out << (p.pass ? "[PASS] " : "[FAIL] ") << p.module << "/" << p.name
        << " observed=" << fmt(p.observed) << " bound=" << fmt(p.bound);
    if (!p.detail.empty()) out << " (" << p.detail << ")";
    out << "\n";
  }
  out << (r.all_pass() ? "all properties hold" : "PROPERTY FAILURES PRESENT") << "\n";
}

PropertyResult check_parseval_map(const SpectrumMap& map, GridShape shape,
                                  int trials, std::uint64_t seed, double tol) {
  check_arg(shape.rows >= 1 && shape.cols >= 1, "check_parseval_map: empty shape");
  check_arg(trials >= 1, "check_parseval_map: trials must be positive");
  RandomStream rs(seed);
  double worst = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> x(shape.size());
    for (double& v : x) v = rs.gaussian();
    std::vector<cdouble> X = map(x);
    const double nx = l2_norm(x);
    worst = std::max(worst, std::abs(l2_norm(X) - nx) / std::max(nx, 1e-300));
  }
  PropertyResult r = make_result("transforms", "parseval_map", worst, tol);
  return r;
}

PropertyResult check_dense_variance_ratio(TransformKind kind, int n, int m,
                                          double component_variance, int batch,
                                          int draws, std::uint64_t seed) {
  check_arg(n >= 2 && m >= 1 && m <= n, "check_dense_variance_ratio: bad sizes");
  check_arg(std::isfinite(component_variance) && component_variance > 0.0,
            "check_dense_variance_ratio: variance must be positive");
  check_arg(batch >= 2 && draws >= 1, "check_dense_variance_ratio: bad sampling plan");

  const bool complex_path = kind == TransformKind::Dft;
  const double sd = std::sqrt(component_variance);
  TransformOperator op(kind, GridShape::one_d(n));
  RandomStream root(seed);
  RandomStream input_rs = root.substream(1);
  RandomStream weight_rs = root.substream(2);

  // Input batch once; keep the m low-pass coefficients and the input power.
  std::vector<double> xm_re(static_cast<size_t>(batch) * m);
  std::vector<cdouble> xm_cx(complex_path ? static_cast<size_t>(batch) * m : 0);
  double in_power = 0.0;
  for (int b = 0; b < batch; ++b) {
    Signal x = random_signal(GridShape::one_d(n), input_rs);
    for (double v : x.values) in_power += v * v;
    Spectrum X = op.forward(x);
    for (int k = 0; k < m; ++k) {
      if (complex_path)
        xm_cx[static_cast<size_t>(b) * m + k] = X.dft[k];
      else
        xm_re[static_cast<size_t>(b) * m + k] = X.dct[k];
    }
  }

  Spectrum Z;
  Z.kind = kind;
  Z.shape = GridShape::one_d(n);
  if (complex_path)
    Z.dft.assign(n, cdouble(0));
  else
    Z.dct.assign(n, 0.0);

  double ratio_sum = 0.0;
  std::vector<double> a_re(static_cast<size_t>(m) * m);
  std::vector<cdouble> a_cx(complex_path ? static_cast<size_t>(m) * m : 0);
  for (int d = 0; d < draws; ++d) {
    RandomStream wr = weight_rs.substream(d);
    if (complex_path)
      for (cdouble& w : a_cx) w = cdouble(wr.gaussian(sd), wr.gaussian(sd));
    else
      for (double& w : a_re) w = wr.gaussian(sd);

    double out_power = 0.0;
    for (int b = 0; b < batch; ++b) {
      if (complex_path) {
        const cdouble* xm = &xm_cx[static_cast<size_t>(b) * m];
        for (int k = 0; k < m; ++k) {
          cdouble acc(0.0, 0.0);
          for (int j = 0; j < m; ++j) acc += a_cx[static_cast<size_t>(k) * m + j] * xm[j];
          Z.dft[k] = acc;
        }
        for (const cdouble& v : op.inverse_complex(Z)) out_power += std::norm(v);
      } else {
        const double* xm = &xm_re[static_cast<size_t>(b) * m];
        for (int k = 0; k < m; ++k) {
          double acc = 0.0;
          for (int j = 0; j < m; ++j) acc += a_re[static_cast<size_t>(k) * m + j] * xm[j];
          Z.dct[k] = acc;
        }
        for (double v : op.inverse(Z).values) out_power += v * v;
      }
    }
    ratio_sum += out_power / in_power;
  }
  const double mean_ratio = ratio_sum / draws;
  PropertyResult r = make_result("initialization", "dense_variance_ratio",
                                 std::abs(mean_ratio - 1.0), 0.1,
                                 "mean_ratio=" + fmt(mean_ratio));
  return r;
}

}  // namespace sfdm
