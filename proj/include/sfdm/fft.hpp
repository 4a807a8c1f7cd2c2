#pragma once
// Complex FFT kernels backing the orthonormal transforms.
//
// Power-of-two sizes run an iterative radix-2 Cooley-Tukey with precomputed
// twiddles and bit-reversal tables. Other sizes fall back to the definitional
// O(N^2) sum over a precomputed root table; correctness over speed there.
// Both directions are unnormalized: forward sums exp(-2*pi*i*k*n/N), inverse
// sums exp(+2*pi*i*k*n/N). Callers apply their own scaling.

#include <vector>

#include "sfdm/common.hpp"

namespace sfdm::detail {

struct FftTables {
  int n = 0;
  bool pow2 = false;
  std::vector<int> bitrev;       // pow2 only
  std::vector<cdouble> roots;    // exp(-2*pi*i*j/n); j < n/2 when pow2, j < n otherwise

  explicit FftTables(int n);
  FftTables() = default;
};

// In-place transform of a[0..n). Tables must match the length.
void fft(cdouble* a, const FftTables& tables, bool inverse);

}  // namespace sfdm::detail
