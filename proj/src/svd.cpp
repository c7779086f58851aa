// Copyright 2026 The splitwire Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>

#include "splitwire/distill.hpp"
#include "splitwire/errors.hpp"

namespace splitwire::distill {

// One-sided (Hestenes) Jacobi: rotate column pairs until mutually orthogonal;
// the column norms are then the singular values.
std::vector<double> singular_values(const Matrix& m) {
  // Work on whichever orientation has fewer columns.
  Matrix a = m.cols <= m.rows ? m : m.transposed();
  const std::size_t rows = a.rows;
  const std::size_t cols = a.cols;
  constexpr double kTol = 1e-15;
  constexpr int kMaxSweeps = 100;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += a(i, p) * a(i, p);
          beta += a(i, q) * a(i, q);
          gamma += a(i, p) * a(i, q);
        }
        if (gamma == 0.0 || std::fabs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double ap = a(i, p);
          const double aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(cols);
  for (std::size_t c = 0; c < cols; ++c) {
    double norm = 0.0;
    for (std::size_t i = 0; i < rows; ++i) norm += a(i, c) * a(i, c);
    sigma[c] = std::sqrt(norm);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

double eckart_young_bound(const Matrix& a, const Matrix& samples, std::size_t b) {
  if (a.cols != samples.cols) throw ShapeError("eckart_young_bound: map input width differs from sample width");
  const Matrix response = matmul(a, samples.transposed());  // d_out x N
  const auto sigma = singular_values(response);
  double tail = 0.0;
  for (std::size_t i = b; i < sigma.size(); ++i) tail += sigma[i] * sigma[i];
  return tail;
}

}  // namespace splitwire::distill
