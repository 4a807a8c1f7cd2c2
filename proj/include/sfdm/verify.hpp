#pragma once
// Executable invariant suite: every mathematical property the library rests
// on, bundled as named checks with pinned tolerances. The CLI `verify`
// subcommand runs the full suite and reports machine-readable results; unit
// tests exercise the parameterized checks with deliberately broken inputs to
// confirm the suite can actually fail.
//
// Timing-derived results (wall-clock stability) are flagged so report
// writers can keep serialized artifacts bit-identical across reruns: their
// measured values go to the human-readable stream only.

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "sfdm/transforms.hpp"

namespace sfdm {

struct PropertyResult {
  std::string module;  // owning module, e.g. "transforms"
  std::string name;    // property, e.g. "parseval"
  double observed = 0.0;
  double bound = 0.0;  // pass requires observed <= bound
  bool pass = false;
  bool timing = false;  // wall-clock-derived observation
  std::string detail;
};

struct VerifyReport {
  std::uint64_t seed = 0;
  std::vector<PropertyResult> results;

  bool all_pass() const;
};

// Runs every module's invariant checks. `modules` empty runs all; otherwise
// only the named modules (unknown names are rejected).
VerifyReport run_property_suite(std::uint64_t seed,
                                const std::vector<std::string>& modules = {});

std::vector<std::string> verify_module_names();

// Deterministic JSON report: pass/fail and bounds always, observed values
// only for non-timing properties.
void write_verify_json(const VerifyReport& r, std::ostream& out);

// One "[PASS]"/"[FAIL]" line per property, observed values included.
void print_verify_report(const VerifyReport& r, std::ostream& out);

// --- parameterized checks -------------------------------------------------
// The suite calls these with the library's own pieces; tests call them with
// broken ones (an unnormalized transform, a wrong weight variance) to prove
// the checks detect violations.

// Norm preservation of an arbitrary signal->coefficients map on random
// inputs: observed = max relative |coefficient norm - signal norm|.
using SpectrumMap = std::function<std::vector<cdouble>(const std::vector<double>&)>;
PropertyResult check_parseval_map(const SpectrumMap& map, GridShape shape,
                                  int trials, std::uint64_t seed,
                                  double tol = 1e-10);

// Monte Carlo total-variance ratio through one truncating dense spectral
// layer whose weight components carry `component_variance`. Passes iff the
// mean output/input variance ratio over weight draws lies in [0.9, 1.1];
// observed = |mean ratio - 1|.
PropertyResult check_dense_variance_ratio(TransformKind kind, int n, int m,
                                          double component_variance, int batch,
                                          int draws, std::uint64_t seed);

}  // namespace sfdm
