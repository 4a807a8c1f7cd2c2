#include "sfdm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "sfdm/layers.hpp"
#include "sfdm/rng.hpp"

namespace sfdm {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_us(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::micro>(b - a).count();
}

// Smallest positive tick observed; the floor for trustworthy measurements.
double clock_granularity_us() {
  double best = 1e9;
  auto prev = Clock::now();
  for (int i = 0; i < 512; ++i) {
    auto now = Clock::now();
    const double d = elapsed_us(prev, now);
    if (d > 0.0) best = std::min(best, d);
    prev = now;
  }
  return std::clamp(best, 1e-4, 1e3);
}

void consume(double v) { asm volatile("" : : "r,m"(v) : "memory"); }

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(pos);
  const size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[hi] * frac;
}

template <typename T>
double run_passes(const SpectralModel<T>& model, const TransformOperator& op,
                  const Signal& x, int batch) {
  const auto t0 = Clock::now();
  double sink = 0.0;
  for (int b = 0; b < batch; ++b) {
    Signal out = predict_signal(model, x, op);
    sink += out.values[0];
  }
  const auto t1 = Clock::now();
  consume(sink);
  return elapsed_us(t0, t1);
}

struct Timing {
  double median_us = 0.0;
  double iqr_us = 0.0;
  int batch = 1;
};

template <typename T>
Timing time_wiring(const SpectralModel<T>& model, const Signal& x,
                   int repetitions, int warmup, double granularity_us) {
  const TransformOperator op = model.make_operator();
  for (int i = 0; i < warmup; ++i) run_passes(model, op, x, 1);

  int batch = 1;
  while (run_passes(model, op, x, batch) < 10.0 * granularity_us &&
         batch < (1 << 20))
    batch *= 2;

  std::vector<double> samples(repetitions);
  for (double& s : samples)
    s = run_passes(model, op, x, batch) / static_cast<double>(batch);

  Timing t;
  t.median_us = quantile(samples, 0.5);
  t.iqr_us = quantile(samples, 0.75) - quantile(samples, 0.25);
  t.batch = batch;
  return t;
}

template <typename T>
Timing time_model(const AnyModel& any, const Signal& x, int repetitions,
                  int warmup, double granularity_us) {
  return time_wiring(std::get<SpectralModel<T>>(any), x, repetitions, warmup,
                     granularity_us);
}

}  // namespace

BenchReport run_speedup_grid(const BenchGrid& grid, TransformKind kind) {
  check_arg(!grid.depths.empty() && !grid.widths.empty() &&
                !grid.resolutions.empty(),
            "bench: grid axes must be nonempty");
  check_arg(grid.repetitions >= 5, "bench: need at least 5 repetitions");
  check_arg(grid.warmup >= 0, "bench: warmup must be nonnegative");
  check_arg(grid.modes_per_axis >= 1, "bench: modes must be positive");
  for (int d : grid.depths) check_arg(d >= 1, "bench: depths must be positive");
  for (int w : grid.widths) check_arg(w >= 1, "bench: widths must be positive");
  for (int r : grid.resolutions)
    check_arg(r >= 2, "bench: resolutions must be at least 2");

  const double granularity = clock_granularity_us();
  BenchReport report;
  report.kind = kind;

  RandomStream rs(grid.seed);
  for (int resolution : grid.resolutions) {
    Signal x(GridShape::one_d(resolution), 1);
    for (double& v : x.values) v = rs.gaussian();
    for (int width : grid.widths) {
      for (int depth : grid.depths) {
        ModelConfig cfg;
        cfg.kind = kind;
        cfg.shape = GridShape::one_d(resolution);
        cfg.modes_per_axis = std::min(grid.modes_per_axis, resolution);
        cfg.depth = depth;
        cfg.width = width;
        cfg.seed = grid.seed;

        cfg.wiring = Wiring::SingleTransform;
        AnyModel t1 = build_model(cfg);
        cfg.wiring = Wiring::PerLayer;
        AnyModel fno = build_model(cfg);

        BenchCell cell;
        cell.depth = depth;
        cell.width = width;
        cell.resolution = resolution;
        Timing tt, tf;
        if (kind == TransformKind::Dct2) {
          tt = time_model<double>(t1, x, grid.repetitions, grid.warmup, granularity);
          tf = time_model<double>(fno, x, grid.repetitions, grid.warmup, granularity);
        } else {
          tt = time_model<cdouble>(t1, x, grid.repetitions, grid.warmup, granularity);
          tf = time_model<cdouble>(fno, x, grid.repetitions, grid.warmup, granularity);
        }
        cell.t1_median_us = tt.median_us;
        cell.t1_iqr_us = tt.iqr_us;
        cell.fno_median_us = tf.median_us;
        cell.fno_iqr_us = tf.iqr_us;
        cell.batch = std::max(tt.batch, tf.batch);
        check_runtime(tt.median_us > 0.0 && tf.median_us > 0.0,
                      "bench: unmeasurable pass time");
        cell.speedup = tf.median_us / tt.median_us;
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

void write_bench_csv(const BenchReport& report, std::ostream& out) {
  out << "depth,width,resolution,wiring,median_us,iqr_us,speedup\n";
  for (const BenchCell& c : report.cells) {
    out << c.depth << ',' << c.width << ',' << c.resolution << ","
        << "single_transform," << c.t1_median_us << ',' << c.t1_iqr_us << ','
        << c.speedup << "\n";
    out << c.depth << ',' << c.width << ',' << c.resolution << ","
        << "per_layer," << c.fno_median_us << ',' << c.fno_iqr_us << ','
        << c.speedup << "\n";
  }
}

}  // namespace sfdm
