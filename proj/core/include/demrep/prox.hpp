#pragma once

#include <span>

#include "demrep/frames.hpp"
#include "demrep/types.hpp"

namespace demrep {

/// Output of the l-infinity prox: the clamped vector and its clamp level.
struct ProxResult {
  ComplexVector u;
  double alpha = 0.0;
};

double norm_inf(const ComplexVector& x);
/// max(||Re x||_inf, ||Im x||_inf)
double norm_inf_tilde(const ComplexVector& x);
/// Dual norm of norm_inf_tilde under Re<.,.>: sum |Re x_k| + |Im x_k|.
double norm_one_tilde(const ComplexVector& x);

/// Clamp level alpha of the l-infinity prox for the given moduli.
///
/// alpha = max(0, max_k (s_1 + ... + s_k - tau) / k) over the moduli sorted in
/// descending order. Only moduli above max(0, s_1 - tau) can be clamped; the
/// maximum over k is found by fixed-point passes over those instead of a sort.
double linf_clamp_level(std::span<const double> moduli, double tau);

/// argmin_x ||x||_inf + ||x - z||^2 / (2 tau). tau = 0 is the identity.
ProxResult prox_inf(const ComplexVector& z, double tau);

/// Same prox for max(||Re x||_inf, ||Im x||_inf): the real clamp applied to the
/// 2N real and imaginary parts jointly.
ProxResult prox_inf_tilde(const ComplexVector& z, double tau);

/// Projection onto {v : ||v||_2 <= eps}; eps = 0 yields the zero vector.
ComplexVector project_l2_ball(const ComplexVector& w, double eps);

/// Entry-wise clip of each modulus to eps, the literal reading of the CRAM
/// v-update. Kept only for comparison against project_l2_ball.
ComplexVector project_entrywise_disk(const ComplexVector& w, double eps);

/// Projection onto {v : sum |v_k| <= radius}: phases kept, moduli soft-thresholded
/// at the water-filling level.
ComplexVector project_l1_ball(const ComplexVector& z, double radius);

enum class AffineMode { Parseval, Tight, General };

/// Euclidean projection of x onto {x : D x = y}.
///
/// Parseval: x - D^H (D x - y). Tight: x - D^H (D x - y) / A. General solves the
/// M x M system with the frame's cached Cholesky factor of D D^H. Parseval and
/// Tight modes throw ConfigError unless the frame is certified as such.
ComplexVector project_affine(const FrameOperator& frame, const ComplexVector& x,
                             const ComplexVector& y, AffineMode mode);

}  // namespace demrep
