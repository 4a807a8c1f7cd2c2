#pragma once
// Synthetic operator-learning datasets with known ground truth.
//
// Two generators:
//   Heat2d     x0 on an N x N periodic grid, target = analytic heat solution
//              exp(-nu ||k||^2 T) per Fourier mode. Diagonal in k-space by
//              construction, so a diagonal spectral layer has a closed-form
//              optimum.
//   Burgers1d  x0 on a periodic interval, target = pseudospectral solution
//              of u_t = -u u_x + nu u_xx at time T (2/3-rule dealiasing,
//              classical four-stage Runge-Kutta).
//
// Initial conditions are random smooth periodic fields: i.i.d. Gaussian
// spectral coefficients damped by (1+|k|)^(-decay), normalized so each grid
// point has unit variance in expectation, and inverted to n-space. Every
// sample is a pure function of (seed, index).
//
// Wavenumbers are integers on the domain [0, 2pi)^d: frequency index k maps
// to k for k <= N/2 and k - N otherwise, per axis.
//
// File format: "<stem>.sfds" carries the arrays (magic "SFDS", version,
// kind, dims, count, then x and y doubles per sample, little-endian), and
// "<stem>.json" is the manifest (generator config, split sizes, FNV-1a
// checksum of the data file). Manifests contain no timestamps; regenerating
// with the same config produces byte-identical files.

#include <cstdint>
#include <string>
#include <vector>

#include "sfdm/common.hpp"

namespace sfdm {

inline constexpr std::uint32_t kDatasetVersion = 1;

enum class GeneratorKind { Heat2d, Burgers1d };

const char* generator_kind_name(GeneratorKind k);
GeneratorKind generator_kind_from_name(const std::string& name);

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::Heat2d;
  int resolution = 32;      // grid points per axis
  double viscosity = 1e-2;  // nu
  double horizon = 1.0;     // T
  double decay = 2.5;       // initial-condition spectral decay exponent
  int count = 100;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  double val_fraction = 0.1;  // test split takes the remainder
  double dt = 0.0;            // Burgers step; 0 picks one from the CFL rule
};

void validate_generator_config(const GeneratorConfig& cfg);

struct DatasetPair {
  Signal x;
  Signal y;
};

enum class Split { Train, Val, Test };

// Pairs are stored generation-ordered; splits are the leading train block,
// then val, then test.
struct Dataset {
  GeneratorConfig config;
  std::vector<DatasetPair> pairs;
  int n_train = 0;
  int n_val = 0;
  int n_test = 0;

  std::vector<Signal> inputs(Split s) const;
  std::vector<Signal> targets(Split s) const;
};

// Random smooth periodic field, deterministic per (config.seed, index).
Signal sample_initial_condition(const GeneratorConfig& cfg, int index);

// Exact heat-equation solution on a periodic grid: each Fourier mode decays
// by exp(-nu ||k||^2 T). Accepts T = 0 (identity up to transform roundoff).
Signal heat_solution(const Signal& x0, double nu, double T);

// Largest stable step for the Burgers integrator on initial state x0:
// min of the advective bound dx / (pi * max(1, ||x0||_inf)) and the
// diffusive bound 2.5 / (nu * (N/2)^2). Explicit dt must not exceed this.
double burgers_stable_dt(const Signal& x0, double nu);

// Pseudospectral Burgers solution at time T. dt = 0 uses half the stable
// bound; the state is rejected if ||u||_inf exceeds 1e3 at any step.
Signal burgers_solution(const Signal& x0, double nu, double T, double dt = 0.0);

Dataset generate_dataset(const GeneratorConfig& cfg);

// Writes "<stem>.sfds" and "<stem>.json".
void save_dataset(const Dataset& ds, const std::string& stem);

// Reads both files, verifying structure and checksum.
Dataset load_dataset(const std::string& stem);

}  // namespace sfdm
