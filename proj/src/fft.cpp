#include "sfdm/fft.hpp"

#include <cmath>

namespace sfdm::detail {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

FftTables::FftTables(int size) : n(size), pow2(is_pow2(size)) {
  check_arg(n >= 1, "FftTables: length must be positive");
  if (n == 1) return;
  if (pow2) {
    bitrev.resize(n);
    int log2n = 0;
    while ((1 << log2n) < n) ++log2n;
    for (int i = 0; i < n; ++i) {
      int r = 0;
      for (int b = 0; b < log2n; ++b)
        if (i & (1 << b)) r |= 1 << (log2n - 1 - b);
      bitrev[i] = r;
    }
    roots.resize(n / 2);
    for (int j = 0; j < n / 2; ++j) {
      double a = -kTwoPi * j / n;
      roots[j] = {std::cos(a), std::sin(a)};
    }
  } else {
    roots.resize(n);
    for (int j = 0; j < n; ++j) {
      double a = -kTwoPi * j / n;
      roots[j] = {std::cos(a), std::sin(a)};
    }
  }
}

namespace {

void fft_pow2(cdouble* a, const FftTables& t, bool inverse) {
  const int n = t.n;
  for (int i = 0; i < n; ++i) {
    int j = t.bitrev[i];
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len >> 1;
    const int step = n / len;
    for (int base = 0; base < n; base += len) {
      for (int j = 0; j < half; ++j) {
        cdouble w = t.roots[static_cast<size_t>(j) * step];
        if (inverse) w = std::conj(w);
        cdouble u = a[base + j];
        cdouble v = a[base + j + half] * w;
        a[base + j] = u + v;
        a[base + j + half] = u - v;
      }
    }
  }
}

void fft_naive(cdouble* a, const FftTables& t, bool inverse) {
  const int n = t.n;
  std::vector<cdouble> out(n);
  for (int k = 0; k < n; ++k) {
    cdouble acc = 0.0;
    for (int j = 0; j < n; ++j) {
      cdouble w = t.roots[static_cast<size_t>(k) * j % n];
      if (inverse) w = std::conj(w);
      acc += a[j] * w;
    }
    out[k] = acc;
  }
  for (int i = 0; i < n; ++i) a[i] = out[i];
}

}  // namespace

void fft(cdouble* a, const FftTables& t, bool inverse) {
  if (t.n == 1) return;
  if (t.pow2)
    fft_pow2(a, t, inverse);
  else
    fft_naive(a, t, inverse);
}

}  // namespace sfdm::detail
