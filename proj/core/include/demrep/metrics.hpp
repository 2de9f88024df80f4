#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>

#include "demrep/frames.hpp"
#include "demrep/types.hpp"

namespace demrep {

/// N ||x||_inf^2 / ||x||_2^2. Throws ConfigError on the zero vector.
double papr(const ComplexVector& x);
double papr_db(const ComplexVector& x);
double to_db(double linear);

/// PAPR of the band-limited interpolation of x on a factor-times finer grid.
/// The spectrum is zero-padded in the middle (Nyquist bin split evenly for even
/// N) and the result rescaled by sqrt(factor) so the average power is unchanged.
/// Length factor*N spectrum with the N-bin spectrum's positive half at the
/// bottom, negative half at the top and zeros between.
ComplexVector pad_spectrum(const ComplexVector& spectrum, int factor);
ComplexVector oversample(const ComplexVector& x_time, int factor);
double papr_oversampled(const ComplexVector& x_time, int factor);

inline constexpr double kExtremeRelTol = 1e-5;

/// Entries with |x_k| >= (1 - relTol) ||x||_inf.
Index count_extreme(const ComplexVector& x, double rel_tol = kExtremeRelTol);

/// sqrt(N) ||x||_inf / (||y||_2 - epsilon). ConfigError when ||y||_2 <= epsilon.
double empirical_ku(const ComplexVector& x, const ComplexVector& y, double epsilon);

/// 1 / sqrt(B).
double bound_lower_democracy(const FrameBounds& bounds);

struct UpperDemocracyBound {
  double value = std::numeric_limits<double>::infinity();
  bool vacuous = true;
};

/// eta / ((A - eta sqrt(B)) sqrt(delta)) when A > eta sqrt(B); +inf and vacuous otherwise.
UpperDemocracyBound bound_upper_democracy(const FrameBounds& bounds, const UPCertificate& up);

/// N / (N - M + 1).
double bound_papr_fullspark(Index n, Index m);
/// K_u^2 B; infinite input gives infinity.
double bound_papr_up(double k_tilde_u, double b);
double bound_power_increase(double k_tilde_u, double b);

/// ||x_dem||_2^2 / ||x_ls||_2^2.
double power_increase(const ComplexVector& x_dem, const ComplexVector& x_ls);

struct TrialRecord {
  std::string family;
  Index n = 0;
  Index m = 0;
  int trial = 0;
  double rho = 0.0;
  double paprLinear = 0.0;
  double paprDb = 0.0;
  double kHatU = 0.0;
  double kTildeL = 0.0;
  Index extremeCount = 0;
  double powerIncrease = 0.0;
  double normInf = 0.0;
  double normTwo = 0.0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  int iterations = 0;
  double relativeGap = 0.0;
  bool converged = false;

  static std::string csv_header();
  std::string csv_row() const;
  std::string json_line() const;
};

}  // namespace demrep
