#include "demrep/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace demrep {

std::string to_string(NormMode mode) { return mode == NormMode::Inf ? "inf" : "inf-tilde"; }

NormMode norm_mode_from_string(const std::string& name) {
  if (name == "inf") return NormMode::Inf;
  if (name == "inf-tilde") return NormMode::InfTilde;
  throw ConfigError("unknown norm mode '" + name + "'");
}

double dual_norm(PrimalNorm p, const ComplexVector& v) {
  switch (p) {
    case PrimalNorm::Inf: return v.cwiseAbs().sum();
    case PrimalNorm::L1: return norm_inf(v);
    case PrimalNorm::L2: return v.norm();
    case PrimalNorm::InfTilde: return norm_one_tilde(v);
  }
  return 0.0;
}

double dual_objective(const FrameOperator& frame, const ComplexVector& y, const ComplexVector& z,
                      double epsilon, PrimalNorm p) {
  require_length("dual_objective(y)", frame.rows(), y.size());
  require_length("dual_objective(z)", frame.rows(), z.size());
  const double constraint = dual_norm(p, frame.adjoint(z));
  if (constraint > 1.0 + 1e-9)
    throw ConfigError("dual_objective: ||D^H z|| = " + std::to_string(constraint) +
                      " violates the dual constraint; rescale first");
  return y.dot(z).real() - epsilon * z.norm();
}

ComplexVector rescale_dual(const FrameOperator& frame, const ComplexVector& y, const ComplexVector& z,
                           double epsilon, PrimalNorm p) {
  const double constraint = dual_norm(p, frame.adjoint(z));
  const double value = y.dot(z).real() - epsilon * z.norm();
  if (!(constraint > 0.0) || !(value > 0.0)) return ComplexVector::Zero(z.size());
  ComplexVector scaled = z / constraint;
  // Guard against the recomputed norm landing a hair above 1.
  const double check = dual_norm(p, frame.adjoint(scaled));
  if (check > 1.0) scaled /= check;
  return scaled;
}

GapReport certify(const SolverResult& result, const FrameOperator& frame, const ComplexVector& y,
                  const SolverConfig& cfg) {
  const PrimalNorm p = primal_norm(cfg.norm);
  GapReport report;
  report.dual = rescale_dual(frame, y, result.dual, cfg.epsilon, p);
  report.dualObjective = dual_objective(frame, y, report.dual, cfg.epsilon, p);
  report.primalObjective = result.primalObjective;
  report.relativeGap =
      (report.primalObjective - report.dualObjective) / std::max(1.0, report.primalObjective);
  report.certified = report.relativeGap <= cfg.tolGap;
  return report;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

ComplexVector apply_prox(NormMode mode, const ComplexVector& z, double tau) {
  return mode == NormMode::Inf ? prox_inf(z, tau).u : prox_inf_tilde(z, tau).u;
}

double objective(NormMode mode, const ComplexVector& x) {
  return mode == NormMode::Inf ? norm_inf(x) : norm_inf_tilde(x);
}

bool all_finite(const ComplexVector& v) { return v.allFinite(); }

void validate(const SolverConfig& cfg) {
  if (!(cfg.epsilon >= 0.0)) throw ConfigError("solver: epsilon must be nonnegative");
  if (cfg.tau < 0.0 || cfg.sigma < 0.0) throw ConfigError("solver: step sizes must be positive");
  if (cfg.maxIters < 1) throw ConfigError("solver: maxIters must be positive");
  if (cfg.checkEvery < 1) throw ConfigError("solver: checkEvery must be positive");
  if (cfg.tolPrimal < 0.0 || cfg.tolDual < 0.0 || cfg.tolGap < 0.0)
    throw ConfigError("solver: tolerances must be nonnegative");
}

SolverResult zero_solution(const FrameOperator& frame, const ComplexVector& y) {
  SolverResult r;
  r.x = ComplexVector::Zero(frame.cols());
  r.dual = ComplexVector::Zero(frame.rows());
  r.residualFeasibility = y.norm();
  r.converged = true;
  return r;
}

// Projection onto {x : D x = target}.
ComplexVector project_onto(const FrameOperator& frame, const ComplexVector& x, const ComplexVector& target) {
  return x - frame.adjoint(frame.solve_gram(frame.apply(x) - target));
}

// Square invertible D with epsilon = 0: the only feasible point is D^{-1} y.
// A subgradient g of the norm at x with unit dual norm gives the dual
// certificate z = D^{-H} g, for which Re(y^H z) = Re(x^H g) = ||x||.
SolverResult solve_square(const FrameOperator& frame, const ComplexVector& y, const SolverConfig& cfg,
                          Clock::time_point start) {
  SolverResult r;
  r.x = frame.adjoint(frame.solve_gram(y));
  ComplexVector g = ComplexVector::Zero(frame.cols());
  if (cfg.norm == NormMode::Inf) {
    Index k = 0;
    r.x.cwiseAbs().maxCoeff(&k);
    if (std::abs(r.x(k)) > 0.0) g(k) = r.x(k) / std::abs(r.x(k));
  } else {
    Index k = 0;
    double best = -1.0;
    bool real_part = true;
    for (Index i = 0; i < r.x.size(); ++i) {
      if (std::abs(r.x(i).real()) > best) { best = std::abs(r.x(i).real()); k = i; real_part = true; }
      if (std::abs(r.x(i).imag()) > best) { best = std::abs(r.x(i).imag()); k = i; real_part = false; }
    }
    if (best > 0.0)
      g(k) = real_part ? Complex{std::copysign(1.0, r.x(k).real()), 0.0}
                       : Complex{0.0, std::copysign(1.0, r.x(k).imag())};
  }
  const PrimalNorm pnorm = primal_norm(cfg.norm);
  r.dual = rescale_dual(frame, y, frame.solve_gram(frame.apply(g)), 0.0, pnorm);
  r.primalObjective = objective(cfg.norm, r.x);
  r.dualObjective = y.dot(r.dual).real();
  r.gap = r.primalObjective - r.dualObjective;
  r.relativeGap = r.gap / std::max(1.0, r.primalObjective);
  r.residualFeasibility = (frame.apply(r.x) - y).norm();
  r.converged = r.relativeGap <= cfg.tolGap;
  r.seconds = seconds_since(start);
  return r;
}

}  // namespace

SolverResult solve_cram(const FrameOperator& frame, const ComplexVector& y, const SolverConfig& cfg,
                        const IterationObserver& observer) {
  validate(cfg);
  require_length("solve_cram(y)", frame.rows(), y.size());
  const auto start = Clock::now();
  const double y_norm = y.norm();
  const double eps = cfg.epsilon;
  const PrimalNorm pnorm = primal_norm(cfg.norm);

  if (y_norm <= eps) {
    auto r = zero_solution(frame, y);
    r.seconds = seconds_since(start);
    return r;
  }

  if (eps == 0.0 && frame.rows() == frame.cols()) return solve_square(frame, y, cfg, start);

  const double op_norm_sq = frame.spectral_norm_squared() + 1.0;  // ||[D, -I]||^2
  double tau = cfg.tau;
  double sigma = cfg.sigma;
  if (tau == 0.0 || sigma == 0.0) {
    const double product = 0.95 / op_norm_sq;
    // tau scales like ||y|| and sigma like 1/||y||. The M (N - M + 1) / N
    // factor was fitted on Gaussian and DFT frames across M/N; near-square
    // frames want a much smaller primal step.
    const double nn = static_cast<double>(frame.cols());
    const double mm = static_cast<double>(frame.rows());
    const double ratio = y_norm * y_norm * mm * (nn - mm + 1.0) / nn;
    if (tau == 0.0 && sigma == 0.0) {
      tau = std::sqrt(product * ratio);
      sigma = std::sqrt(product / ratio);
    } else if (tau == 0.0) {
      tau = product / sigma;
    } else {
      sigma = product / tau;
    }
  }
  if (!cfg.adaptive && tau * sigma * op_norm_sq >= 1.0)
    throw ConfigError("solve_cram: step sizes violate tau*sigma*(||D||^2+1) < 1");

  const Index n = frame.cols();
  const Index m = frame.rows();
  ComplexVector x = ComplexVector::Zero(n);
  ComplexVector v = ComplexVector::Zero(m);
  ComplexVector lambda = ComplexVector::Zero(m);
  ComplexVector dx = ComplexVector::Zero(m);        // D x_k
  ComplexVector dh_lambda = ComplexVector::Zero(n); // D^H lambda_k

  double adapt_alpha = 0.5;
  int last_direction = 0;

  SolverResult result;
  result.converged = false;
  int k = 0;
  for (; k < cfg.maxIters; ++k) {
    ComplexVector x1 = apply_prox(cfg.norm, x - tau * dh_lambda, tau);
    ComplexVector v1 = cfg.entrywiseResidualClip ? project_entrywise_disk(v + tau * lambda, eps)
                                                 : project_l2_ball(v + tau * lambda, eps);
    ComplexVector dx1 = frame.apply(x1);
    ComplexVector lambda1 = lambda + sigma * ((2.0 * dx1 - dx) - (2.0 * v1 - v) - y);
    ComplexVector dh_lambda1 = frame.adjoint(lambda1);

    if (!all_finite(lambda1) || !all_finite(x1))
      throw NumericalError("solve_cram: iterates diverged (non-finite values)");
    if (observer) observer(k + 1, x1);

    const bool check = ((k + 1) % cfg.checkEvery == 0) || (k + 1 == cfg.maxIters);
    if (check || cfg.adaptive) {
      // Stationarity residual of the primal step and the dual step's residual.
      const ComplexVector dlam = lambda - lambda1;
      const ComplexVector px = (x - x1) / tau - (dh_lambda - dh_lambda1);
      const ComplexVector pv = (v - v1) / tau + dlam;
      const double primal_stat = std::sqrt(px.squaredNorm() + pv.squaredNorm());
      const double dual_stat = (dlam / sigma - ((dx - dx1) - (v - v1))).norm();

      if (check) {
        const double feas = (dx1 - v1 - y).norm();
        bool done = feas <= cfg.tolPrimal * y_norm && primal_stat <= cfg.tolDual;
        if (done) {
          const ComplexVector xp = cfg.polishFeasibility ? project_onto(frame, x1, y + v1) : x1;
          const double pobj = objective(cfg.norm, xp);
          const ComplexVector z = rescale_dual(frame, y, -lambda1, eps, pnorm);
          const double dobj = y.dot(z).real() - eps * z.norm();
          done = (pobj - dobj) / std::max(1.0, pobj) <= cfg.tolGap;
        }
        if (done) {
          x = std::move(x1);
          v = std::move(v1);
          lambda = std::move(lambda1);
          ++k;
          result.converged = true;
          break;
        }
      }

      if (cfg.adaptive) {
        int direction = 0;
        if (primal_stat > 10.0 * dual_stat) direction = 1;
        else if (dual_stat > 10.0 * primal_stat) direction = -1;
        if (direction != 0) {
          if (last_direction != 0 && direction != last_direction) adapt_alpha *= 0.5;
          const double f = 1.0 + adapt_alpha;
          if (direction > 0) {
            tau *= f;
            sigma /= f;
          } else {
            tau /= f;
            sigma *= f;
          }
          last_direction = direction;
        }
      }
    }

    x = std::move(x1);
    v = std::move(v1);
    lambda = std::move(lambda1);
    dx = std::move(dx1);
    dh_lambda = std::move(dh_lambda1);
  }

  if (cfg.polishFeasibility) x = project_onto(frame, x, y + v);
  result.x = std::move(x);
  result.iterations = k;
  result.primalObjective = objective(cfg.norm, result.x);
  result.dual = rescale_dual(frame, y, -lambda, eps, pnorm);
  result.dualObjective = y.dot(result.dual).real() - eps * result.dual.norm();
  result.gap = result.primalObjective - result.dualObjective;
  result.relativeGap = result.gap / std::max(1.0, result.primalObjective);
  result.residualFeasibility = (frame.apply(result.x) - y).norm();
  result.tau = tau;
  result.sigma = sigma;
  result.seconds = seconds_since(start);
  return result;
}

SolverResult solve_cramp(const FrameOperator& frame, const ComplexVector& y, const SolverConfig& cfg,
                         const IterationObserver& observer) {
  validate(cfg);
  require_length("solve_cramp(y)", frame.rows(), y.size());
  if (cfg.epsilon != 0.0) throw ConfigError("solve_cramp: only epsilon = 0 is supported; use solve_cram");
  const auto tight = frame.tight_constant();
  if (!tight) throw ConfigError("solve_cramp: frame is neither Parseval nor tight");
  const double a = *tight;
  const auto start = Clock::now();
  const double y_norm = y.norm();
  const PrimalNorm pnorm = primal_norm(cfg.norm);
  const Index n = frame.cols();

  if (y_norm == 0.0) {
    auto r = zero_solution(frame, y);
    r.seconds = seconds_since(start);
    return r;
  }

  // Default step fitted on subsampled DFT frames; within 2x of the best fixed
  // step from M/N = 1/256 up to near-square.
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(frame.rows());
  const double tau = cfg.tau > 0.0 ? cfg.tau : 0.6 * y_norm * std::sqrt(nn * (nn - mm + 1.0) / mm);
  auto project = [&](const ComplexVector& x) -> ComplexVector {
    return x - frame.adjoint(frame.apply(x) - y) / a;
  };

  // Minimum-norm feasible warm start.
  ComplexVector z = frame.adjoint(y) / a;
  ComplexVector x = z;
  ComplexVector x_hat = z;
  ComplexVector z_prev = z;
  double prev_objective = objective(cfg.norm, x);

  SolverResult result;
  int k = 0;
  for (; k < cfg.maxIters; ++k) {
    x_hat = apply_prox(cfg.norm, z, tau);
    ComplexVector x1 = project(2.0 * x_hat - z);
    z_prev = z;
    z += x1 - x_hat;
    if (!all_finite(z)) throw NumericalError("solve_cramp: iterates diverged (non-finite values)");
    if (observer) observer(k + 1, x1);

    const bool check = ((k + 1) % cfg.checkEvery == 0) || (k + 1 == cfg.maxIters);
    if (check) {
      // Objective change is measured between consecutive checks.
      const double obj = objective(cfg.norm, x1);
      bool done = (x1 - x_hat).norm() <= cfg.tolPrimal * x1.norm() &&
                  std::abs(obj - prev_objective) <= cfg.tolGap * std::max(obj, 1e-300);
      if (done) {
        const ComplexVector zd =
            rescale_dual(frame, y, frame.apply((z_prev - x_hat) / tau) / a, 0.0, pnorm);
        const double dobj = y.dot(zd).real();
        done = (obj - dobj) / std::max(1.0, obj) <= cfg.tolGap;
      }
      if (done) {
        x = std::move(x1);
        ++k;
        result.converged = true;
        break;
      }
      prev_objective = obj;
    }
    x = std::move(x1);
  }

  result.x = std::move(x);
  result.iterations = k;
  result.primalObjective = objective(cfg.norm, result.x);
  // At a fixed point (z - x_hat)/tau is a subgradient of the objective at x,
  // which lies in the range of D^H; mapping it through D / A recovers the dual.
  result.dual = rescale_dual(frame, y, frame.apply((z_prev - x_hat) / tau) / a, 0.0, pnorm);
  result.dualObjective = y.dot(result.dual).real();
  result.gap = result.primalObjective - result.dualObjective;
  result.relativeGap = result.gap / std::max(1.0, result.primalObjective);
  result.residualFeasibility = (frame.apply(result.x) - y).norm();
  result.tau = tau;
  result.seconds = seconds_since(start);
  return result;
}

ComplexVector solve_least_squares(const FrameOperator& frame, const ComplexVector& y, double epsilon) {
  require_length("solve_least_squares(y)", frame.rows(), y.size());
  if (epsilon < 0.0) throw ConfigError("solve_least_squares: epsilon must be nonnegative");
  const double y_norm = y.norm();
  if (y_norm <= epsilon) return ComplexVector::Zero(frame.cols());
  if (epsilon == 0.0) return frame.adjoint(frame.solve_gram(y));

  if (const auto a = frame.tight_constant()) {
    // D D^H = A I: residual mu ||y|| / (A + mu) = eps in closed form.
    const double mu = *a * epsilon / (y_norm - epsilon);
    return frame.adjoint(y) / (*a + mu);
  }

  if (frame.rows() > kDenseEigenCap)
    throw ConfigError("solve_least_squares: epsilon > 0 on a non-tight frame needs M <= dense cap");
  const ComplexMatrix d = frame.materialize();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(d * d.adjoint());
  if (eig.info() != Eigen::Success) throw NumericalError("solve_least_squares: eigensolver failed");
  const RealVector lam = eig.eigenvalues();
  if (lam(0) <= 0.0) throw NumericalError("solve_least_squares: D D^H is singular");
  const ComplexVector coeff = eig.eigenvectors().adjoint() * y;

  // ||y - D x(mu)|| = ||mu (Lambda + mu)^{-1} Q^H y||, increasing in mu.
  auto residual = [&](double mu) {
    double s = 0.0;
    for (Index i = 0; i < lam.size(); ++i) s += std::norm(coeff(i) * (mu / (lam(i) + mu)));
    return std::sqrt(s);
  };
  double lo = 0.0;
  double hi = lam(lam.size() - 1);
  while (residual(hi) < epsilon) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(mid) < epsilon) lo = mid;
    else hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  const double mu = 0.5 * (lo + hi);
  ComplexVector s(lam.size());
  for (Index i = 0; i < lam.size(); ++i) s(i) = coeff(i) / (lam(i) + mu);
  return frame.adjoint(eig.eigenvectors() * s);
}

}  // namespace demrep
