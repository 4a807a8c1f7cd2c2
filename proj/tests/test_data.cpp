#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "oracles.hpp"
#include "sfdm/data.hpp"
#include "sfdm/kspace.hpp"
#include "sfdm/transforms.hpp"

using namespace sfdm;

namespace {

double rel_l2_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double field_mean(const Signal& s) {
  double m = 0.0;
  for (double v : s.values) m += v;
  return m / static_cast<double>(s.values.size());
}

std::filesystem::path fresh_dir(const char* tag) {
  auto dir = std::filesystem::temp_directory_path() /
             (std::string("sfdm_data_") + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("initial conditions are smooth, deterministic, unit-variance fields") {
  SUBCASE("same (seed, index) reproduces bitwise") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 64;
    cfg.seed = 42;
    Signal a = sample_initial_condition(cfg, 7);
    Signal b = sample_initial_condition(cfg, 7);
    REQUIRE(a.values.size() == b.values.size());
    for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);

    Signal c = sample_initial_condition(cfg, 8);
    bool differs = false;
    for (size_t i = 0; i < a.values.size(); ++i)
      differs |= a.values[i] != c.values[i];
    CHECK(differs);
  }
  SUBCASE("steep decay concentrates energy in the lowest wavenumbers") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 64;
    cfg.decay = 8.0;
    TransformOperator op(TransformKind::Dft, GridShape::one_d(64));
    for (int idx : {0, 3, 11}) {
      Signal x = sample_initial_condition(cfg, idx);
      Spectrum sp = op.forward(x);
      double inside = 0.0, total = 0.0;
      for (int k = 0; k < 64; ++k) {
        const int keff = k <= 32 ? k : k - 64;
        const double e = std::norm(sp.dft[k]);
        total += e;
        if (std::abs(keff) <= 2) inside += e;
      }
      CHECK(total - inside < 0.01 * total);
    }
  }
  SUBCASE("pixel statistics match the construction") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 16;
    cfg.decay = 1.0;
    cfg.seed = 5;
    const int n_samples = 10000;
    std::vector<double> mean(16, 0.0), second(16, 0.0);
    for (int i = 0; i < n_samples; ++i) {
      Signal x = sample_initial_condition(cfg, i);
      for (int p = 0; p < 16; ++p) {
        mean[p] += x.values[p];
        second[p] += x.values[p] * x.values[p];
      }
    }
    double var_avg = 0.0;
    for (int p = 0; p < 16; ++p) {
      mean[p] /= n_samples;
      second[p] /= n_samples;
      CHECK(std::abs(mean[p]) < 3.0 / std::sqrt(static_cast<double>(n_samples)));
      var_avg += second[p] - mean[p] * mean[p];
    }
    var_avg /= 16.0;
    CHECK(var_avg == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("heat solution is the exact per-mode decay") {
  SUBCASE("zero horizon is the identity") {
    GeneratorConfig cfg;
    cfg.resolution = 16;
    Signal x = sample_initial_condition(cfg, 0);
    Signal y = heat_solution(x, 0.3, 0.0);
    for (size_t i = 0; i < x.values.size(); ++i)
      CHECK(y.values[i] == doctest::Approx(x.values[i]).epsilon(1e-12));
  }
  SUBCASE("constant fields never move") {
    Signal x(GridShape::two_d(8, 8), 1);
    for (double& v : x.values) v = 2.5;
    Signal y = heat_solution(x, 0.7, 3.0);
    for (double v : y.values) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
  }
  SUBCASE("a single mode decays by the closed-form factor") {
    const int n = 32;
    Signal x(GridShape::one_d(n), 1);
    for (int i = 0; i < n; ++i) x.values[i] = std::cos(3.0 * 2.0 * M_PI * i / n);
    Signal y = heat_solution(x, 0.01, 1.0);
    const double ratio = std::exp(-0.09);
    CHECK(ratio == doctest::Approx(0.913931).epsilon(1e-6));
    for (int i = 0; i < n; ++i)
      CHECK(y.values[i] == doctest::Approx(ratio * x.values[i]).epsilon(1e-10));
  }
  SUBCASE("agrees with direct time integration of the spectral system") {
    // RK4 on dU_k/dt = -nu ||k||^2 U_k, the definition the closed form solves
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Heat2d;
    cfg.resolution = 8;
    Signal x = sample_initial_condition(cfg, 2);
    const double nu = 0.05, T = 1.0;
    Signal want = heat_solution(x, nu, T);

    TransformOperator op(TransformKind::Dft, x.shape);
    Spectrum sp = op.forward(x);
    const int steps = 4000;
    const double dt = T / steps;
    for (int i = 0; i < 64; ++i) {
      const int kr0 = i / 8 <= 4 ? i / 8 : i / 8 - 8;
      const int kc0 = i % 8 <= 4 ? i % 8 : i % 8 - 8;
      const double lam = -nu * (kr0 * kr0 + kc0 * kc0);
      cdouble u = sp.dft[i];
      for (int s = 0; s < steps; ++s) {
        const cdouble k1 = lam * u;
        const cdouble k2 = lam * (u + 0.5 * dt * k1);
        const cdouble k3 = lam * (u + 0.5 * dt * k2);
        const cdouble k4 = lam * (u + dt * k3);
        u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      sp.dft[i] = u;
    }
    Signal integrated = op.inverse(sp);
    CHECK(rel_l2_diff(integrated.values, want.values) < 1e-8);
  }
}

TEST_CASE("burgers integrator has the advertised accuracy and physics") {
  GeneratorConfig cfg;
  cfg.kind = GeneratorKind::Burgers1d;
  cfg.resolution = 64;
  cfg.decay = 4.0;
  cfg.seed = 9;
  Signal x0 = sample_initial_condition(cfg, 1);

  SUBCASE("diffusion-dominated small amplitudes reduce to the heat solution") {
    Signal tiny = x0;
    for (double& v : tiny.values) v *= 1e-4;
    Signal u = burgers_solution(tiny, 0.1, 0.5);
    Signal h = heat_solution(tiny, 0.1, 0.5);
    CHECK(rel_l2_diff(u.values, h.values) < 1e-3);
  }
  SUBCASE("halving the step shrinks the error sixteenfold") {
    Signal mild = x0;
    for (double& v : mild.values) v *= 0.5;
    const double nu = 0.05, T = 0.2;
    Signal a = burgers_solution(mild, nu, T, 0.01);
    Signal b = burgers_solution(mild, nu, T, 0.005);
    Signal c = burgers_solution(mild, nu, T, 0.0025);
    double e1 = 0.0, e2 = 0.0;
    for (size_t i = 0; i < a.values.size(); ++i) {
      e1 += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
      e2 += (b.values[i] - c.values[i]) * (b.values[i] - c.values[i]);
    }
    const double ratio = std::sqrt(e1) / std::sqrt(e2);
    CHECK(ratio > 11.0);
    CHECK(ratio < 22.0);
  }
  SUBCASE("the spatial mean is conserved") {
    Signal u = burgers_solution(x0, 0.02, 0.5);
    CHECK(std::abs(field_mean(u) - field_mean(x0)) < 1e-10);
  }
  SUBCASE("energy never grows") {
    Signal u = burgers_solution(x0, 0.02, 0.5);
    CHECK(l2_norm(u.values) <= l2_norm(x0.values));
  }
  SUBCASE("amplitude beyond the limit is rejected") {
    Signal huge = x0;
    for (double& v : huge.values) v *= 5e3;
    CHECK_THROWS_AS(burgers_solution(huge, 0.02, 0.1), std::runtime_error);
  }
  SUBCASE("steps beyond the stability bound are rejected") {
    const double bound = burgers_stable_dt(x0, 0.05);
    CHECK_THROWS_AS(burgers_solution(x0, 0.05, 0.2, 2.0 * bound),
                    std::invalid_argument);
    CHECK_THROWS_AS(burgers_solution(x0, 0.05, 0.2, -0.001),
                    std::invalid_argument);
  }
}

TEST_CASE("dataset generation splits, contracts, and reproduces") {
  SUBCASE("split sizes follow the configured fractions") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Heat2d;
    cfg.resolution = 8;
    cfg.count = 100;
    cfg.horizon = 0.5;
    Dataset ds = generate_dataset(cfg);
    CHECK(ds.n_train == 80);
    CHECK(ds.n_val == 10);
    CHECK(ds.n_test == 10);
    CHECK(ds.inputs(Split::Train).size() == 80);
    CHECK(ds.targets(Split::Val).size() == 10);
    CHECK(ds.inputs(Split::Test).size() == 10);
  }
  SUBCASE("diffusion contracts every target") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Heat2d;
    cfg.resolution = 16;
    cfg.count = 12;
    cfg.viscosity = 0.02;
    Dataset ds = generate_dataset(cfg);
    for (const DatasetPair& p : ds.pairs)
      CHECK(l2_norm(p.y.values) <= l2_norm(p.x.values) + 1e-12);
  }
  SUBCASE("regeneration is bitwise identical") {
    GeneratorConfig cfg;
    cfg.kind = GeneratorKind::Burgers1d;
    cfg.resolution = 32;
    cfg.count = 5;
    cfg.horizon = 0.2;
    cfg.viscosity = 0.05;
    cfg.seed = 77;
    Dataset a = generate_dataset(cfg);
    Dataset b = generate_dataset(cfg);
    for (int i = 0; i < cfg.count; ++i) {
      for (size_t j = 0; j < a.pairs[i].x.values.size(); ++j)
        CHECK(a.pairs[i].x.values[j] == b.pairs[i].x.values[j]);
      for (size_t j = 0; j < a.pairs[i].y.values.size(); ++j)
        CHECK(a.pairs[i].y.values[j] == b.pairs[i].y.values[j]);
    }
  }
}

TEST_CASE("dataset files roundtrip bit-exactly and reject corruption") {
  GeneratorConfig cfg;
  cfg.kind = GeneratorKind::Heat2d;
  cfg.resolution = 8;
  cfg.count = 10;
  cfg.horizon = 0.3;
  cfg.seed = 123;
  Dataset ds = generate_dataset(cfg);
  auto dir = fresh_dir("roundtrip");
  const std::string stem = (dir / "set").string();
  save_dataset(ds, stem);

  SUBCASE("roundtrip") {
    Dataset back = load_dataset(stem);
    CHECK(back.config.resolution == cfg.resolution);
    CHECK(back.config.seed == cfg.seed);
    CHECK(back.config.viscosity == cfg.viscosity);
    CHECK(back.n_train == ds.n_train);
    CHECK(back.n_val == ds.n_val);
    CHECK(back.n_test == ds.n_test);
    REQUIRE(back.pairs.size() == ds.pairs.size());
    for (size_t i = 0; i < ds.pairs.size(); ++i) {
      for (size_t j = 0; j < ds.pairs[i].x.values.size(); ++j)
        CHECK(back.pairs[i].x.values[j] == ds.pairs[i].x.values[j]);
      for (size_t j = 0; j < ds.pairs[i].y.values.size(); ++j)
        CHECK(back.pairs[i].y.values[j] == ds.pairs[i].y.values[j]);
    }
  }
  SUBCASE("writing twice yields byte-identical files") {
    const std::string stem2 = (dir / "set2").string();
    save_dataset(ds, stem2);
    for (const char* ext : {".sfds", ".json"}) {
      std::ifstream f1(stem + ext, std::ios::binary);
      std::ifstream f2(stem2 + ext, std::ios::binary);
      std::string s1((std::istreambuf_iterator<char>(f1)),
                     std::istreambuf_iterator<char>());
      std::string s2((std::istreambuf_iterator<char>(f2)),
                     std::istreambuf_iterator<char>());
      CHECK(!s1.empty());
      CHECK(s1 == s2);
    }
  }
  SUBCASE("the manifest records no timestamps") {
    std::ifstream f(stem + ".json");
    std::string text((std::istreambuf_iterator<char>(f)),
                     std::istreambuf_iterator<char>());
    CHECK(text.find("time") == std::string::npos);
    CHECK(text.find("date") == std::string::npos);
  }
  SUBCASE("a flipped payload byte fails the checksum") {
    const std::string stem3 = (dir / "set3").string();
    save_dataset(ds, stem3);
    std::fstream f(stem3 + ".sfds",
                   std::ios::binary | std::ios::in | std::ios::out);
    f.seekp(-16, std::ios::end);
    char b;
    f.read(&b, 1);
    f.seekp(-16, std::ios::end);
    b = static_cast<char>(b ^ 0x1);
    f.write(&b, 1);
    f.close();
    CHECK_THROWS_AS(load_dataset(stem3), IoError);
  }
  SUBCASE("a truncated payload is rejected") {
    const std::string stem4 = (dir / "set4").string();
    save_dataset(ds, stem4);
    auto size = std::filesystem::file_size(stem4 + ".sfds");
    std::filesystem::resize_file(stem4 + ".sfds", size - 64);
    CHECK_THROWS_AS(load_dataset(stem4), IoError);
  }
  SUBCASE("a mangled manifest is rejected") {
    const std::string stem5 = (dir / "set5").string();
    save_dataset(ds, stem5);
    std::ifstream in(stem5 + ".json");
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    in.close();
    auto pos = text.find("\"decay\"");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 7, "\"dekay\"");
    std::ofstream out(stem5 + ".json");
    out << text;
    out.close();
    CHECK_THROWS_AS(load_dataset(stem5), IoError);

    std::ofstream bad(stem5 + ".json");
    bad << "{ not json";
    bad.close();
    CHECK_THROWS_AS(load_dataset(stem5), IoError);
  }
  SUBCASE("a missing data file is rejected") {
    CHECK_THROWS_AS(load_dataset((dir / "nothing").string()), IoError);
  }
  std::filesystem::remove_all(dir);
}
