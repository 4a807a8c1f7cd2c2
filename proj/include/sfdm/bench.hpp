#pragma once
// Wall-clock forward-pass comparison of the two wirings over a grid of
// depth x width x resolution. Per cell, both models share depth, width,
// selector, and input; the only structural difference is where transforms
// run. Times are medians over repetitions after warmup passes, on a
// monotonic clock; a pass shorter than 10x the clock granularity is batched
// (doubling) until measurable, and per-pass time is elapsed/batch.
// Everything runs single-threaded.

#include <cstdint>
#include <ostream>
#include <vector>

#include "sfdm/transforms.hpp"

namespace sfdm {

struct BenchGrid {
  std::vector<int> depths = {1, 2, 4};
  std::vector<int> widths = {4};
  std::vector<int> resolutions = {64};
  int modes_per_axis = 16;  // clamped to each resolution
  int repetitions = 9;      // at least 5
  int warmup = 2;
  std::uint64_t seed = 0;
};

struct BenchCell {
  int depth = 0;
  int width = 0;
  int resolution = 0;
  double t1_median_us = 0.0;
  double t1_iqr_us = 0.0;
  double fno_median_us = 0.0;
  double fno_iqr_us = 0.0;
  double speedup = 0.0;  // fno median / t1 median
  int batch = 1;         // passes per timed sample
};

struct BenchReport {
  TransformKind kind = TransformKind::Dct2;
  std::vector<BenchCell> cells;
};

BenchReport run_speedup_grid(const BenchGrid& grid, TransformKind kind);

// CSV rows: depth,width,resolution,wiring,median_us,iqr_us,speedup.
void write_bench_csv(const BenchReport& report, std::ostream& out);

}  // namespace sfdm
