#pragma once

// Reference implementations used only by tests. None of these call into the
// library's numerical kernels.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "demrep/types.hpp"

namespace demrep::oracle {

inline ComplexVector naive_multiply(const ComplexMatrix& d, const ComplexVector& x) {
  ComplexVector out = ComplexVector::Zero(d.rows());
  for (Index i = 0; i < d.rows(); ++i)
    for (Index k = 0; k < d.cols(); ++k) out(i) += d(i, k) * x(k);
  return out;
}

inline ComplexVector naive_adjoint(const ComplexMatrix& d, const ComplexVector& z) {
  ComplexVector out = ComplexVector::Zero(d.cols());
  for (Index k = 0; k < d.cols(); ++k)
    for (Index i = 0; i < d.rows(); ++i) out(k) += std::conj(d(i, k)) * z(i);
  return out;
}

/// Unitary DFT matrix, F(j, k) = exp(-2 pi i j k / n) / sqrt(n).
inline ComplexMatrix dft_matrix(Index n) {
  ComplexMatrix f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (Index j = 0; j < n; ++j)
    for (Index k = 0; k < n; ++k) {
      const double phase = -2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      f(j, k) = std::polar(scale, phase);
    }
  return f;
}

/// Projection onto the l1 ball by bisection on the soft-threshold level.
inline ComplexVector project_l1_bisection(const ComplexVector& z, double radius) {
  double total = 0.0, hi = 0.0;
  for (Index k = 0; k < z.size(); ++k) {
    total += std::abs(z(k));
    hi = std::max(hi, std::abs(z(k)));
  }
  if (total <= radius) return z;
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (Index k = 0; k < z.size(); ++k) s += std::max(0.0, std::abs(z(k)) - mid);
    (s > radius ? lo : hi) = mid;
  }
  const double level = 0.5 * (lo + hi);
  ComplexVector out(z.size());
  for (Index k = 0; k < z.size(); ++k) {
    const double a = std::abs(z(k));
    out(k) = a > level ? z(k) * ((a - level) / a) : Complex(0.0, 0.0);
  }
  return out;
}

/// prox of tau ||.||_inf through the Moreau decomposition.
inline ComplexVector prox_inf_moreau(const ComplexVector& z, double tau) {
  if (tau == 0.0) return z;
  return z - tau * project_l1_bisection(z / tau, 1.0);
}

/// Largest singular value of a two-column matrix from its 2x2 Gram matrix.
inline double two_column_sigma_max(const ComplexVector& a, const ComplexVector& b) {
  const double g11 = a.squaredNorm(), g22 = b.squaredNorm();
  const double off = std::norm(a.dot(b));
  const double mean = 0.5 * (g11 + g22);
  const double lambda = mean + std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + off);
  return std::sqrt(lambda);
}

inline ComplexVector random_vector(std::mt19937_64& gen, Index n) {
  std::normal_distribution<double> nd;
  ComplexVector v(n);
  for (Index k = 0; k < n; ++k) v(k) = Complex(nd(gen), nd(gen));
  return v;
}

inline ComplexMatrix random_matrix(std::mt19937_64& gen, Index m, Index n) {
  std::normal_distribution<double> nd;
  ComplexMatrix d(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index k = 0; k < n; ++k) d(i, k) = Complex(nd(gen), nd(gen)) / std::sqrt(2.0 * n);
  return d;
}

/// Re <a, b> = Re(a^H b).
inline double real_inner(const ComplexVector& a, const ComplexVector& b) { return a.dot(b).real(); }

}  // namespace demrep::oracle
