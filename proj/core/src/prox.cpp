#include "demrep/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace demrep {

double norm_inf(const ComplexVector& x) {
  double m = 0.0;
  for (Index i = 0; i < x.size(); ++i) m = std::max(m, std::norm(x(i)));
  return std::sqrt(m);
}

double norm_inf_tilde(const ComplexVector& x) {
  double m = 0.0;
  for (Index i = 0; i < x.size(); ++i)
    m = std::max({m, std::abs(x(i).real()), std::abs(x(i).imag())});
  return m;
}

double norm_one_tilde(const ComplexVector& x) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += std::abs(x(i).real()) + std::abs(x(i).imag());
  return s;
}

double linf_clamp_level(std::span<const double> moduli, double tau) {
  if (moduli.empty()) return 0.0;
  const double top = *std::max_element(moduli.begin(), moduli.end());
  const double floor_level = std::max(0.0, top - tau);

  std::vector<double> active;
  active.reserve(moduli.size());
  for (double a : moduli)
    if (a > floor_level) active.push_back(a);
  if (active.empty()) return 0.0;

  // The level max_k (s_1 + ... + s_k - tau) / k is the fixed point of
  // alpha <- (sum of moduli above alpha - tau) / count, reached from below in a
  // few passes without sorting.
  double alpha = -std::numeric_limits<double>::infinity();
  for (;;) {
    double sum = 0.0;
    std::size_t kept = 0;
    for (double a : active)
      if (a > alpha) {
        sum += a;
        active[kept++] = a;
      }
    active.resize(kept);
    const double next = (sum - tau) / static_cast<double>(kept);
    if (!(next > alpha)) break;
    alpha = next;
  }
  return std::max(0.0, alpha);
}

ProxResult prox_inf(const ComplexVector& z, double tau) {
  if (tau < 0.0 || std::isnan(tau)) throw ConfigError("prox_inf: tau must be nonnegative");
  if (tau == 0.0) return {z, norm_inf(z)};

  std::vector<double> moduli(static_cast<std::size_t>(z.size()));
  for (Index i = 0; i < z.size(); ++i) moduli[static_cast<std::size_t>(i)] = std::sqrt(std::norm(z(i)));
  const double alpha = linf_clamp_level(moduli, tau);

  ComplexVector u(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = moduli[static_cast<std::size_t>(i)];
    u(i) = (a > alpha) ? z(i) * (alpha / a) : z(i);
  }
  return {std::move(u), alpha};
}

ProxResult prox_inf_tilde(const ComplexVector& z, double tau) {
  if (tau < 0.0 || std::isnan(tau)) throw ConfigError("prox_inf_tilde: tau must be nonnegative");
  if (tau == 0.0) return {z, norm_inf_tilde(z)};

  const Index n = z.size();
  std::vector<double> moduli(static_cast<std::size_t>(2 * n));
  for (Index i = 0; i < n; ++i) {
    moduli[static_cast<std::size_t>(2 * i)] = std::abs(z(i).real());
    moduli[static_cast<std::size_t>(2 * i + 1)] = std::abs(z(i).imag());
  }
  const double alpha = linf_clamp_level(moduli, tau);
  auto clamp = [alpha](double v) { return std::clamp(v, -alpha, alpha); };

  ComplexVector u(n);
  for (Index i = 0; i < n; ++i) u(i) = {clamp(z(i).real()), clamp(z(i).imag())};
  return {std::move(u), alpha};
}

ComplexVector project_l2_ball(const ComplexVector& w, double eps) {
  if (eps < 0.0) throw ConfigError("project_l2_ball: eps must be nonnegative");
  if (eps == 0.0) return ComplexVector::Zero(w.size());
  const double norm = w.norm();
  if (norm <= eps) return w;
  return w * (eps / norm);
}

ComplexVector project_entrywise_disk(const ComplexVector& w, double eps) {
  if (eps < 0.0) throw ConfigError("project_entrywise_disk: eps must be nonnegative");
  ComplexVector out(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    const double a = std::abs(w(i));
    out(i) = (a > eps) ? w(i) * (eps / a) : w(i);
  }
  return out;
}

ComplexVector project_l1_ball(const ComplexVector& z, double radius) {
  if (!(radius > 0.0)) throw ConfigError("project_l1_ball: radius must be positive");
  std::vector<double> moduli(static_cast<std::size_t>(z.size()));
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    moduli[static_cast<std::size_t>(i)] = std::abs(z(i));
    total += moduli[static_cast<std::size_t>(i)];
  }
  if (total <= radius) return z;

  std::vector<double> sorted = moduli;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double partial = 0.0;
  double threshold = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    partial += sorted[k];
    const double t = (partial - radius) / static_cast<double>(k + 1);
    if (sorted[k] > t) threshold = t;
    else break;
  }

  ComplexVector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double a = moduli[static_cast<std::size_t>(i)];
    out(i) = (a > threshold) ? z(i) * ((a - threshold) / a) : Complex{0.0, 0.0};
  }
  return out;
}

ComplexVector project_affine(const FrameOperator& frame, const ComplexVector& x,
                             const ComplexVector& y, AffineMode mode) {
  require_length("project_affine(x)", frame.cols(), x.size());
  require_length("project_affine(y)", frame.rows(), y.size());
  const ComplexVector residual = frame.apply(x) - y;
  switch (mode) {
    case AffineMode::Parseval:
      if (!frame.is_parseval()) throw ConfigError("project_affine: frame is not Parseval");
      return x - frame.adjoint(residual);
    case AffineMode::Tight: {
      const auto a = frame.tight_constant();
      if (!a) throw ConfigError("project_affine: frame is not tight");
      return x - frame.adjoint(residual) / *a;
    }
    case AffineMode::General:
      return x - frame.adjoint(frame.solve_gram(residual));
  }
  throw ConfigError("project_affine: unknown mode");
}

}  // namespace demrep
