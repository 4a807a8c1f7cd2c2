#pragma once
// Test-side oracles, kept deliberately independent of the library internals:
// transforms are evaluated from their defining sums with per-element calls to
// std::cos/std::sin, never through the FFT kernels under test.

#include <cmath>
#include <complex>
#include <vector>

#include "sfdm/common.hpp"

namespace oracle {

constexpr double kPi = 3.1415926535897932384626433832795;

using sfdm::cdouble;

// Orthonormal DCT-II matrix, W[k][n] = s_k cos(pi k (2n+1) / (2N)).
inline std::vector<std::vector<double>> dct_matrix(int n) {
  std::vector<std::vector<double>> w(n, std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    double s = std::sqrt((k == 0 ? 1.0 : 2.0) / n);
    for (int j = 0; j < n; ++j)
      w[k][j] = s * std::cos(kPi * k * (2 * j + 1) / (2.0 * n));
  }
  return w;
}

// Unitary DFT matrix, W[k][n] = exp(-2 pi i k n / N) / sqrt(N).
inline std::vector<std::vector<cdouble>> dft_matrix(int n) {
  std::vector<std::vector<cdouble>> w(n, std::vector<cdouble>(n));
  double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) {
      double a = -2.0 * kPi * k * j / n;
      w[k][j] = cdouble(s * std::cos(a), s * std::sin(a));
    }
  return w;
}

template <typename T, typename U>
std::vector<T> apply_matrix(const std::vector<std::vector<T>>& w,
                            const std::vector<U>& x) {
  std::vector<T> y(w.size(), T(0));
  for (size_t k = 0; k < w.size(); ++k)
    for (size_t j = 0; j < x.size(); ++j) y[k] += w[k][j] * x[j];
  return y;
}

// Two-dimensional definitional double sums (row-major input H x W).
inline std::vector<double> dct2d_definitional(const std::vector<double>& x,
                                              int h, int w) {
  std::vector<double> out(static_cast<size_t>(h) * w, 0.0);
  for (int k1 = 0; k1 < h; ++k1) {
    double s1 = std::sqrt((k1 == 0 ? 1.0 : 2.0) / h);
    for (int k2 = 0; k2 < w; ++k2) {
      double s2 = std::sqrt((k2 == 0 ? 1.0 : 2.0) / w);
      double acc = 0.0;
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
          acc += x[static_cast<size_t>(r) * w + c] *
                 std::cos(kPi * k1 * (2 * r + 1) / (2.0 * h)) *
                 std::cos(kPi * k2 * (2 * c + 1) / (2.0 * w));
      out[static_cast<size_t>(k1) * w + k2] = s1 * s2 * acc;
    }
  }
  return out;
}

inline std::vector<cdouble> dft2d_definitional(const std::vector<double>& x,
                                               int h, int w) {
  std::vector<cdouble> out(static_cast<size_t>(h) * w, cdouble(0));
  double s = 1.0 / std::sqrt(static_cast<double>(h) * w);
  for (int k1 = 0; k1 < h; ++k1)
    for (int k2 = 0; k2 < w; ++k2) {
      cdouble acc = 0.0;
      for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
          double a = -2.0 * kPi * (static_cast<double>(k1) * r / h +
                                   static_cast<double>(k2) * c / w);
          acc += x[static_cast<size_t>(r) * w + c] * cdouble(std::cos(a), std::sin(a));
        }
      out[static_cast<size_t>(k1) * w + k2] = s * acc;
    }
  return out;
}

// Definitional synthesis sums (the adjoints of the analysis sums above).
inline std::vector<double> dct2d_definitional_inverse(
    const std::vector<double>& coef, int h, int w) {
  std::vector<double> out(static_cast<size_t>(h) * w, 0.0);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int k1 = 0; k1 < h; ++k1) {
        double s1 = std::sqrt((k1 == 0 ? 1.0 : 2.0) / h);
        for (int k2 = 0; k2 < w; ++k2) {
          double s2 = std::sqrt((k2 == 0 ? 1.0 : 2.0) / w);
          acc += s1 * s2 * coef[static_cast<size_t>(k1) * w + k2] *
                 std::cos(kPi * k1 * (2 * r + 1) / (2.0 * h)) *
                 std::cos(kPi * k2 * (2 * c + 1) / (2.0 * w));
        }
      }
      out[static_cast<size_t>(r) * w + c] = acc;
    }
  return out;
}

inline std::vector<cdouble> dft2d_definitional_inverse(
    const std::vector<cdouble>& coef, int h, int w) {
  std::vector<cdouble> out(static_cast<size_t>(h) * w, cdouble(0));
  double s = 1.0 / std::sqrt(static_cast<double>(h) * w);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      cdouble acc = 0.0;
      for (int k1 = 0; k1 < h; ++k1)
        for (int k2 = 0; k2 < w; ++k2) {
          double a = 2.0 * kPi * (static_cast<double>(k1) * r / h +
                                  static_cast<double>(k2) * c / w);
          acc += coef[static_cast<size_t>(k1) * w + k2] *
                 cdouble(std::cos(a), std::sin(a));
        }
      out[static_cast<size_t>(r) * w + c] = s * acc;
    }
  return out;
}

// --- small dense matrix helpers for composition oracles -------------------

template <typename T>
using Matrix = std::vector<std::vector<T>>;

template <typename T>
Matrix<T> matmul(const Matrix<T>& a, const Matrix<T>& b) {
  size_t n = a.size(), k = b.size(), m = b[0].size();
  Matrix<T> out(n, std::vector<T>(m, T(0)));
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < k; ++j)
      for (size_t l = 0; l < m; ++l) out[i][l] += a[i][j] * b[j][l];
  return out;
}

template <typename T>
Matrix<T> transpose(const Matrix<T>& a) {
  Matrix<T> out(a[0].size(), std::vector<T>(a.size()));
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[0].size(); ++j) out[j][i] = a[i][j];
  return out;
}

// Rows of the identity picked out by the selector: (m x n) gather.
template <typename T>
Matrix<T> gather_matrix(const std::vector<size_t>& indices, size_t n) {
  Matrix<T> out(indices.size(), std::vector<T>(n, T(0)));
  for (size_t i = 0; i < indices.size(); ++i) out[i][indices[i]] = T(1);
  return out;
}

}  // namespace oracle
