#pragma once
// Core shared types: grid shapes and real-valued multi-channel signals.
// Signals are stored row-major per channel; one-dimensional data uses a
// single row so that every code path can treat grids uniformly.

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sfdm {

using cdouble = std::complex<double>;

inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline void check_runtime(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

// File and stream failures; kept distinct so the CLI can map them to their
// own exit code.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline void check_io(bool ok, const std::string& msg) {
  if (!ok) throw IoError(msg);
}

struct GridShape {
  int rows = 1;
  int cols = 0;

  static GridShape one_d(int n) { return GridShape{1, n}; }
  static GridShape two_d(int h, int w) { return GridShape{h, w}; }

  int size() const { return rows * cols; }
  bool one_dimensional() const { return rows == 1; }
  int ndim() const { return rows == 1 ? 1 : 2; }

  bool operator==(const GridShape& o) const {
    return rows == o.rows && cols == o.cols;
  }
  bool operator!=(const GridShape& o) const { return !(*this == o); }

  std::string str() const {
    return one_dimensional() ? std::to_string(cols)
                             : std::to_string(rows) + "x" + std::to_string(cols);
  }
};

// Real n-space field. values.size() == channels * shape.size().
struct Signal {
  GridShape shape;
  int channels = 1;
  std::vector<double> values;

  Signal() = default;
  explicit Signal(GridShape s, int c = 1)
      : shape(s), channels(c), values(static_cast<size_t>(s.size()) * c, 0.0) {}

  double* channel(int c) { return values.data() + static_cast<size_t>(c) * shape.size(); }
  const double* channel(int c) const {
    return values.data() + static_cast<size_t>(c) * shape.size();
  }
};

inline void validate_signal(const Signal& x, const std::string& who) {
  check_arg(x.shape.rows >= 1 && x.shape.cols >= 1, who + ": empty shape");
  check_arg(x.channels >= 1, who + ": channels must be positive");
  check_arg(x.values.size() == static_cast<size_t>(x.shape.size()) * x.channels,
            who + ": value count does not match shape");
  for (double v : x.values)
    check_arg(std::isfinite(v), who + ": non-finite signal value");
}

inline double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double l2_norm(const std::vector<cdouble>& v) {
  double s = 0.0;
  for (const cdouble& z : v) s += std::norm(z);
  return std::sqrt(s);
}

// FNV-1a, used for dataset checksums.
inline std::uint64_t fnv1a64(const void* data, size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace sfdm
