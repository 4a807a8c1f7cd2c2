#pragma once
// Exact GeLU (error-function form) and its derivative. Complex inputs are
// handled componentwise on the real and imaginary parts, which is how the
// k-space stacks apply nonlinearities to complex coefficients.

#include <cmath>

#include "sfdm/common.hpp"

namespace sfdm {

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * 0.70710678118654752440));
}

inline double gelu_prime(double x) {
  constexpr double inv_sqrt2 = 0.70710678118654752440;
  constexpr double inv_sqrt2pi = 0.39894228040143267794;
  double phi = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
  return phi + x * inv_sqrt2pi * std::exp(-0.5 * x * x);
}

inline cdouble gelu(const cdouble& z) {
  return {gelu(z.real()), gelu(z.imag())};
}

}  // namespace sfdm
