#pragma once

#include <functional>
#include <string>

#include "demrep/frames.hpp"
#include "demrep/prox.hpp"
#include "demrep/types.hpp"

namespace demrep {

/// Which peak measure the solvers minimize.
enum class NormMode { Inf, InfTilde };

std::string to_string(NormMode mode);
NormMode norm_mode_from_string(const std::string& name);

struct SolverConfig {
  /// Approximation budget: ||y - D x||_2 <= epsilon.
  double epsilon = 0.0;
  /// Primal step. 0 selects the solver default.
  double tau = 0.0;
  /// Dual step (CRAM only). 0 selects the default.
  double sigma = 0.0;
  int maxIters = 20000;
  double tolPrimal = 1e-8;
  double tolDual = 1e-8;
  double tolGap = 1e-6;
  /// Residual-balancing step adaptation (CRAM only). Keeps tau*sigma fixed.
  bool adaptive = false;
  NormMode norm = NormMode::Inf;
  /// Stopping tests run every `checkEvery` iterations.
  int checkEvery = 10;
  /// Replace the final CRAM iterate by its projection onto {D x = y + v}, which
  /// makes the reported primal objective that of an exactly feasible point.
  bool polishFeasibility = true;
  /// Literal per-entry reading of the CRAM v-update instead of the l2-ball
  /// projection. Only for A/B comparison; it does not solve the stated problem.
  bool entrywiseResidualClip = false;
};

struct SolverResult {
  ComplexVector x;
  /// Dual-feasible certificate z (||D^H z||_* <= 1 in the norm dual to `norm`).
  ComplexVector dual;
  int iterations = 0;
  double primalObjective = 0.0;
  double dualObjective = 0.0;
  /// primalObjective - dualObjective.
  double gap = 0.0;
  /// gap / max(1, primalObjective).
  double relativeGap = 0.0;
  /// ||D x - y||_2 of the returned x.
  double residualFeasibility = 0.0;
  bool converged = false;
  double seconds = 0.0;
  double tau = 0.0;
  double sigma = 0.0;
};

/// Called with (iteration index, current primal iterate).
using IterationObserver = std::function<void(int, const ComplexVector&)>;

/// Primal-dual hybrid gradient on the saddle problem
///   min_{x, ||v|| <= eps} max_lambda ||x|| + Re<D x - v - y, lambda>,
/// with the extrapolated dual step that makes tau*sigma*(||D||^2 + 1) < 1 a
/// convergence guarantee. Throws ConfigError on a violated step condition and
/// NumericalError on non-finite iterates.
SolverResult solve_cram(const FrameOperator& frame, const ComplexVector& y, const SolverConfig& cfg,
                        const IterationObserver& observer = {});

/// Douglas-Rachford splitting between the l-infinity prox and the projection
/// onto {D x = y} for Parseval or tight frames with epsilon = 0. Every iterate
/// handed to the observer and the returned x satisfy D x = y to roundoff.
SolverResult solve_cramp(const FrameOperator& frame, const ComplexVector& y, const SolverConfig& cfg,
                         const IterationObserver& observer = {});

/// Minimum l2-norm x with ||y - D x||_2 <= epsilon.
ComplexVector solve_least_squares(const FrameOperator& frame, const ComplexVector& y, double epsilon);

enum class PrimalNorm { L1, L2, Inf, InfTilde };

/// Norm dual to `p` under Re<.,.>, evaluated on v.
double dual_norm(PrimalNorm p, const ComplexVector& v);

/// Re(y^H z) - eps ||z||_2 for a z satisfying ||D^H z||_dual <= 1 (to 1e-9);
/// ConfigError otherwise.
double dual_objective(const FrameOperator& frame, const ComplexVector& y, const ComplexVector& z,
                      double epsilon, PrimalNorm p);

/// Largest c in [0, 1/||D^H z||_dual] maximizing the dual objective of c*z.
ComplexVector rescale_dual(const FrameOperator& frame, const ComplexVector& y, const ComplexVector& z,
                           double epsilon, PrimalNorm p);

struct GapReport {
  double primalObjective = 0.0;
  double dualObjective = 0.0;
  double relativeGap = 0.0;
  bool certified = false;
  ComplexVector dual;
};

GapReport certify(const SolverResult& result, const FrameOperator& frame, const ComplexVector& y,
                  const SolverConfig& cfg);

inline PrimalNorm primal_norm(NormMode mode) {
  return mode == NormMode::Inf ? PrimalNorm::Inf : PrimalNorm::InfTilde;
}

}  // namespace demrep
