#include "sfdm/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "sfdm/kspace.hpp"
#include "sfdm/rng.hpp"
#include "sfdm/transforms.hpp"

namespace sfdm {

namespace {

constexpr char kMagic[4] = {'S', 'F', 'D', 'S'};
constexpr double kBlowupLimit = 1e3;

// Signed integer wavenumber of frequency index i on an axis of extent n.
int effective_wavenumber(int i, int n) { return i <= n / 2 ? i : i - n; }

double mode_magnitude(int flat, GridShape shape) {
  const int kr = effective_wavenumber(flat / shape.cols, shape.rows);
  const int kc = effective_wavenumber(flat % shape.cols, shape.cols);
  return std::sqrt(static_cast<double>(kr) * kr + static_cast<double>(kc) * kc);
}

double linf(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

const char* generator_kind_name(GeneratorKind k) {
  return k == GeneratorKind::Heat2d ? "heat_2d" : "burgers_1d";
}

GeneratorKind generator_kind_from_name(const std::string& name) {
  if (name == "heat_2d") return GeneratorKind::Heat2d;
  if (name == "burgers_1d") return GeneratorKind::Burgers1d;
  throw std::invalid_argument("unknown generator kind: " + name);
}

void validate_generator_config(const GeneratorConfig& cfg) {
  check_arg(cfg.resolution >= 8, "generator: resolution must be at least 8");
  check_arg(cfg.viscosity > 0.0, "generator: viscosity must be positive");
  check_arg(cfg.horizon > 0.0, "generator: horizon must be positive");
  check_arg(cfg.decay >= 0.0, "generator: decay must be nonnegative");
  check_arg(cfg.count >= 1, "generator: count must be positive");
  check_arg(cfg.train_fraction >= 0.0 && cfg.val_fraction >= 0.0 &&
                cfg.train_fraction + cfg.val_fraction <= 1.0 + 1e-12,
            "generator: split fractions must be nonnegative and sum to at most 1");
  check_arg(cfg.dt >= 0.0, "generator: dt must be nonnegative");
}

Signal sample_initial_condition(const GeneratorConfig& cfg, int index) {
  validate_generator_config(cfg);
  check_arg(index >= 0, "sample_initial_condition: index must be nonnegative");
  const GridShape shape = cfg.kind == GeneratorKind::Heat2d
                              ? GridShape::two_d(cfg.resolution, cfg.resolution)
                              : GridShape::one_d(cfg.resolution);
  const int n = shape.size();

  // Damping profile, normalized so E||x||^2 = n (unit per-point variance).
  std::vector<double> s(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    s[i] = std::pow(1.0 + mode_magnitude(i, shape), -cfg.decay);
    total += s[i] * s[i];
  }
  const double norm = std::sqrt(static_cast<double>(n) / total);
  for (double& v : s) v *= norm;

  RandomStream rs = RandomStream(cfg.seed).substream(static_cast<std::uint64_t>(index));
  Spectrum sp;
  sp.kind = TransformKind::Dft;
  sp.shape = shape;
  sp.dft.assign(n, cdouble(0.0, 0.0));
  const double half = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < n; ++i) {
    const int mir = mirror_index(i, shape);
    if (mir == i) {
      sp.dft[i] = cdouble(s[i] * rs.gaussian(), 0.0);
    } else if (i < mir) {
      const double a = rs.gaussian();
      const double b = rs.gaussian();
      sp.dft[i] = s[i] * half * cdouble(a, b);
      sp.dft[mir] = std::conj(sp.dft[i]);
    }
  }
  TransformOperator op(TransformKind::Dft, shape);
  return op.inverse(sp);
}

Signal heat_solution(const Signal& x0, double nu, double T) {
  validate_signal(x0, "heat_solution");
  check_arg(nu > 0.0, "heat_solution: viscosity must be positive");
  check_arg(T >= 0.0, "heat_solution: horizon must be nonnegative");
  TransformOperator op(TransformKind::Dft, x0.shape);
  Spectrum sp = op.forward(x0);
  const int n = x0.shape.size();
  for (int c = 0; c < sp.channels; ++c)
    for (int i = 0; i < n; ++i) {
      const double m = mode_magnitude(i, x0.shape);
      sp.dft[static_cast<size_t>(c) * n + i] *= std::exp(-nu * m * m * T);
    }
  return op.inverse(sp);
}

double burgers_stable_dt(const Signal& x0, double nu) {
  validate_signal(x0, "burgers_stable_dt");
  check_arg(x0.shape.one_dimensional() && x0.channels == 1,
            "burgers_stable_dt: needs a one-channel 1-D field");
  check_arg(nu > 0.0, "burgers_stable_dt: viscosity must be positive");
  const int n = x0.shape.cols;
  const double dx = 2.0 * M_PI / n;
  const double umax = std::max(1.0, linf(x0.values));
  const double advective = dx / (M_PI * umax);
  const double kmax = n / 2;
  const double diffusive = 2.5 / (nu * kmax * kmax);
  return std::min(advective, diffusive);
}

Signal burgers_solution(const Signal& x0, double nu, double T, double dt) {
  validate_signal(x0, "burgers_solution");
  check_arg(x0.shape.one_dimensional() && x0.channels == 1,
            "burgers_solution: needs a one-channel 1-D field");
  check_arg(x0.shape.cols >= 8, "burgers_solution: grid too small");
  check_arg(nu > 0.0, "burgers_solution: viscosity must be positive");
  check_arg(T > 0.0, "burgers_solution: horizon must be positive");
  check_runtime(linf(x0.values) <= kBlowupLimit,
                "burgers_solution: state exceeded the amplitude limit");

  const double bound = burgers_stable_dt(x0, nu);
  if (dt == 0.0) dt = 0.5 * bound;
  check_arg(dt > 0.0 && dt <= bound,
            "burgers_solution: dt violates the stability bound");
  const double raw_steps = std::ceil(T / dt);
  check_arg(raw_steps <= 1e8, "burgers_solution: step budget too large");
  const int n_steps = static_cast<int>(raw_steps);
  dt = T / n_steps;

  const int n = x0.shape.cols;
  std::vector<double> keff(n), mask(n), lam(n);
  for (int k = 0; k < n; ++k) {
    keff[k] = effective_wavenumber(k, n);
    mask[k] = 3.0 * std::abs(keff[k]) <= n ? 1.0 : 0.0;
    lam[k] = -nu * keff[k] * keff[k];
  }

  std::vector<cdouble> state = dft_forward_1d(x0.values);

  auto rhs = [&](const std::vector<cdouble>& u_hat) {
    std::vector<cdouble> um(n), dum(n);
    for (int k = 0; k < n; ++k) {
      um[k] = mask[k] * u_hat[k];
      dum[k] = cdouble(0.0, keff[k]) * um[k];
    }
    std::vector<double> u = dft_inverse_1d(um);
    std::vector<double> du = dft_inverse_1d(dum);
    for (int i = 0; i < n; ++i) u[i] *= -du[i];
    std::vector<cdouble> advect = dft_forward_1d(u);
    for (int k = 0; k < n; ++k) advect[k] = mask[k] * advect[k] + lam[k] * u_hat[k];
    return advect;
  };

  std::vector<cdouble> k1, k2, k3, k4, tmp(n);
  for (int step = 0; step < n_steps; ++step) {
    k1 = rhs(state);
    for (int k = 0; k < n; ++k) tmp[k] = state[k] + 0.5 * dt * k1[k];
    k2 = rhs(tmp);
    for (int k = 0; k < n; ++k) tmp[k] = state[k] + 0.5 * dt * k2[k];
    k3 = rhs(tmp);
    for (int k = 0; k < n; ++k) tmp[k] = state[k] + dt * k3[k];
    k4 = rhs(tmp);
    for (int k = 0; k < n; ++k)
      state[k] += dt / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);

    std::vector<double> u_now = dft_inverse_1d(state);
    for (double v : u_now)
      check_runtime(std::isfinite(v) && std::abs(v) <= kBlowupLimit,
                    "burgers_solution: state exceeded the amplitude limit");
  }

  Signal out(x0.shape, 1);
  out.values = dft_inverse_1d(state);
  return out;
}

std::vector<Signal> Dataset::inputs(Split s) const {
  const int begin = s == Split::Train ? 0 : s == Split::Val ? n_train : n_train + n_val;
  const int end = s == Split::Train ? n_train
                  : s == Split::Val ? n_train + n_val
                                    : n_train + n_val + n_test;
  std::vector<Signal> out;
  for (int i = begin; i < end; ++i) out.push_back(pairs[i].x);
  return out;
}

std::vector<Signal> Dataset::targets(Split s) const {
  const int begin = s == Split::Train ? 0 : s == Split::Val ? n_train : n_train + n_val;
  const int end = s == Split::Train ? n_train
                  : s == Split::Val ? n_train + n_val
                                    : n_train + n_val + n_test;
  std::vector<Signal> out;
  for (int i = begin; i < end; ++i) out.push_back(pairs[i].y);
  return out;
}

Dataset generate_dataset(const GeneratorConfig& cfg) {
  validate_generator_config(cfg);
  Dataset ds;
  ds.config = cfg;
  ds.pairs.reserve(cfg.count);
  for (int i = 0; i < cfg.count; ++i) {
    DatasetPair pair;
    pair.x = sample_initial_condition(cfg, i);
    pair.y = cfg.kind == GeneratorKind::Heat2d
                 ? heat_solution(pair.x, cfg.viscosity, cfg.horizon)
                 : burgers_solution(pair.x, cfg.viscosity, cfg.horizon, cfg.dt);
    ds.pairs.push_back(std::move(pair));
  }
  ds.n_train = static_cast<int>(cfg.train_fraction * cfg.count + 1e-9);
  ds.n_val = static_cast<int>(cfg.val_fraction * cfg.count + 1e-9);
  ds.n_test = cfg.count - ds.n_train - ds.n_val;
  check_arg(ds.n_test >= 0, "generate_dataset: split fractions exceed 1");
  return ds;
}

namespace {

std::uint64_t hash_values(const Signal& s, std::uint64_t h) {
  return fnv1a64(s.values.data(), s.values.size() * sizeof(double), h);
}

void check_dataset_consistent(const Dataset& ds, const std::string& who) {
  check_arg(!ds.pairs.empty(), who + ": dataset is empty");
  check_arg(ds.n_train + ds.n_val + ds.n_test ==
                static_cast<int>(ds.pairs.size()),
            who + ": split sizes do not cover the dataset");
  const GridShape shape = ds.pairs.front().x.shape;
  for (const DatasetPair& p : ds.pairs) {
    validate_signal(p.x, who);
    validate_signal(p.y, who);
    check_arg(p.x.shape == shape && p.y.shape == shape,
              who + ": inconsistent sample shapes");
    check_arg(p.x.channels == ds.pairs.front().x.channels &&
                  p.y.channels == ds.pairs.front().y.channels,
              who + ": inconsistent sample channels");
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& stem) {
  check_dataset_consistent(ds, "save_dataset");
  const GridShape shape = ds.pairs.front().x.shape;
  const int xch = ds.pairs.front().x.channels;
  const int ych = ds.pairs.front().y.channels;

  detail::Writer w(stem + ".sfds");
  w.bytes(kMagic, 4);
  w.u32(kDatasetVersion);
  w.u32(ds.config.kind == GeneratorKind::Heat2d ? 0u : 1u);
  w.u32(static_cast<std::uint32_t>(shape.rows));
  w.u32(static_cast<std::uint32_t>(shape.cols));
  w.u32(static_cast<std::uint32_t>(xch));
  w.u32(static_cast<std::uint32_t>(ych));
  w.u64(static_cast<std::uint64_t>(ds.pairs.size()));
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const DatasetPair& p : ds.pairs) {
    w.f64s(p.x.values.data(), p.x.values.size());
    h = hash_values(p.x, h);
    w.f64s(p.y.values.data(), p.y.values.size());
    h = hash_values(p.y, h);
  }
  w.finish();

  nlohmann::json j;
  j["format"] = "sfds-manifest";
  j["version"] = kDatasetVersion;
  j["generator"] = {
      {"kind", generator_kind_name(ds.config.kind)},
      {"resolution", ds.config.resolution},
      {"viscosity", ds.config.viscosity},
      {"horizon", ds.config.horizon},
      {"decay", ds.config.decay},
      {"count", ds.config.count},
      {"seed", ds.config.seed},
      {"train_fraction", ds.config.train_fraction},
      {"val_fraction", ds.config.val_fraction},
      {"dt", ds.config.dt},
  };
  j["shape"] = {{"rows", shape.rows}, {"cols", shape.cols}};
  j["channels"] = {{"x", xch}, {"y", ych}};
  j["splits"] = {{"train", ds.n_train}, {"val", ds.n_val}, {"test", ds.n_test}};
  j["payload_checksum"] = hex64(h);

  std::ofstream out(stem + ".json");
  check_io(out.good(), "cannot open manifest for writing: " + stem + ".json");
  out << j.dump(2) << "\n";
  out.flush();
  check_io(out.good(), "short write to manifest: " + stem + ".json");
}

Dataset load_dataset(const std::string& stem) {
  std::ifstream min(stem + ".json");
  check_io(min.good(), "cannot open manifest: " + stem + ".json");
  nlohmann::json j = nlohmann::json::parse(min, nullptr, false);
  check_io(!j.is_discarded(), "manifest is not valid JSON: " + stem + ".json");

  Dataset ds;
  GridShape shape;
  int xch = 0, ych = 0;
  std::uint64_t count = 0;
  std::string checksum;
  try {
    const auto& g = j.at("generator");
    ds.config.kind = generator_kind_from_name(g.at("kind").get<std::string>());
    ds.config.resolution = g.at("resolution").get<int>();
    ds.config.viscosity = g.at("viscosity").get<double>();
    ds.config.horizon = g.at("horizon").get<double>();
    ds.config.decay = g.at("decay").get<double>();
    ds.config.count = g.at("count").get<int>();
    ds.config.seed = g.at("seed").get<std::uint64_t>();
    ds.config.train_fraction = g.at("train_fraction").get<double>();
    ds.config.val_fraction = g.at("val_fraction").get<double>();
    ds.config.dt = g.at("dt").get<double>();
    shape.rows = j.at("shape").at("rows").get<int>();
    shape.cols = j.at("shape").at("cols").get<int>();
    xch = j.at("channels").at("x").get<int>();
    ych = j.at("channels").at("y").get<int>();
    ds.n_train = j.at("splits").at("train").get<int>();
    ds.n_val = j.at("splits").at("val").get<int>();
    ds.n_test = j.at("splits").at("test").get<int>();
    count = static_cast<std::uint64_t>(ds.config.count);
    checksum = j.at("payload_checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError("manifest missing or mistyped field: " + stem + ".json (" +
                  e.what() + ")");
  } catch (const std::invalid_argument& e) {
    throw IoError("manifest invalid: " + stem + ".json (" + e.what() + ")");
  }
  check_io(shape.rows >= 1 && shape.cols >= 1 && xch >= 1 && ych >= 1 &&
               count >= 1 && ds.n_train >= 0 && ds.n_val >= 0 && ds.n_test >= 0,
           "manifest fields out of range: " + stem + ".json");
  check_io(ds.n_train + ds.n_val + ds.n_test == static_cast<int>(count),
           "manifest splits do not cover the dataset: " + stem + ".json");

  detail::Reader r(stem + ".sfds");
  char magic[4];
  r.bytes(magic, 4);
  check_io(std::memcmp(magic, kMagic, 4) == 0,
           "not a dataset file (bad magic): " + r.path);
  check_io(r.u32() == kDatasetVersion, "unsupported dataset version: " + r.path);
  const std::uint32_t kind = r.u32();
  check_io(kind <= 1, "dataset has unknown generator kind: " + r.path);
  check_io((kind == 0) == (ds.config.kind == GeneratorKind::Heat2d),
           "dataset kind disagrees with manifest: " + r.path);
  check_io(r.u32() == static_cast<std::uint32_t>(shape.rows) &&
               r.u32() == static_cast<std::uint32_t>(shape.cols) &&
               r.u32() == static_cast<std::uint32_t>(xch) &&
               r.u32() == static_cast<std::uint32_t>(ych) && r.u64() == count,
           "dataset header disagrees with manifest: " + r.path);

  std::uint64_t h = 0xcbf29ce484222325ULL;
  ds.pairs.resize(count);
  for (auto& p : ds.pairs) {
    p.x = Signal(shape, xch);
    r.f64s(p.x.values.data(), p.x.values.size());
    h = hash_values(p.x, h);
    p.y = Signal(shape, ych);
    r.f64s(p.y.values.data(), p.y.values.size());
    h = hash_values(p.y, h);
    for (double v : p.x.values)
      check_io(std::isfinite(v), "dataset holds non-finite values: " + r.path);
    for (double v : p.y.values)
      check_io(std::isfinite(v), "dataset holds non-finite values: " + r.path);
  }
  check_io(r.at_end(), "trailing bytes after dataset payload: " + r.path);
  check_io(hex64(h) == checksum, "dataset checksum mismatch: " + r.path);
  return ds;
}

}  // namespace sfdm
