#include "demrep/metrics.hpp"

#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "demrep/io.hpp"
#include "demrep/prox.hpp"
#include "fft.hpp"

namespace demrep {

namespace {

void require_nonzero(const ComplexVector& x, const char* what) {
  if (x.size() == 0 || x.squaredNorm() == 0.0)
    throw ConfigError(std::string(what) + ": input must be a nonzero vector");
}

std::string fmt(double v) { return format_double(v); }

}  // namespace

double papr(const ComplexVector& x) {
  require_nonzero(x, "papr");
  const double peak = norm_inf(x);
  return static_cast<double>(x.size()) * peak * peak / x.squaredNorm();
}

double to_db(double linear) { return 10.0 * std::log10(linear); }

double papr_db(const ComplexVector& x) { return to_db(papr(x)); }

ComplexVector pad_spectrum(const ComplexVector& spec, int factor) {
  if (factor < 1) throw ConfigError("pad_spectrum: factor must be >= 1");
  const Index n = spec.size();
  if (factor == 1) return spec;
  const Index l = n * factor;
  ComplexVector padded = ComplexVector::Zero(l);
  const Index half = n / 2;
  for (Index k = 0; k < (n + 1) / 2; ++k) padded(k) = spec(k);
  for (Index k = half + 1; k < n; ++k) padded(k + (l - n)) = spec(k);
  if (n % 2 == 0 && n > 0) {
    padded(half) = 0.5 * spec(half);
    padded(l - half) += 0.5 * spec(half);
  }
  return padded;
}

ComplexVector oversample(const ComplexVector& x_time, int factor) {
  if (factor < 1) throw ConfigError("oversample: factor must be >= 1");
  if (factor == 1 || x_time.size() == 0) return x_time;
  const ComplexVector padded = pad_spectrum(detail::unitary_dft(x_time, false), factor);
  return detail::unitary_dft(padded, true) * std::sqrt(static_cast<double>(factor));
}

double papr_oversampled(const ComplexVector& x_time, int factor) {
  if (factor < 1) throw ConfigError("papr_oversampled: factor must be >= 1");
  return papr(oversample(x_time, factor));
}

Index count_extreme(const ComplexVector& x, double rel_tol) {
  require_nonzero(x, "count_extreme");
  if (!(rel_tol >= 0.0 && rel_tol < 1.0)) throw ConfigError("count_extreme: relTol must lie in [0, 1)");
  const double level = (1.0 - rel_tol) * norm_inf(x);
  Index count = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::abs(x(i)) >= level) ++count;
  return count;
}

double empirical_ku(const ComplexVector& x, const ComplexVector& y, double epsilon) {
  const double denom = y.norm() - epsilon;
  if (!(denom > 0.0)) throw ConfigError("empirical_ku: requires ||y||_2 > epsilon");
  return std::sqrt(static_cast<double>(x.size())) * norm_inf(x) / denom;
}

double bound_lower_democracy(const FrameBounds& bounds) {
  if (!(bounds.upper > 0.0)) throw ConfigError("bound_lower_democracy: B must be positive");
  return 1.0 / std::sqrt(bounds.upper);
}

UpperDemocracyBound bound_upper_democracy(const FrameBounds& bounds, const UPCertificate& up) {
  const double margin = bounds.lower - up.eta * std::sqrt(bounds.upper);
  if (!(margin > 0.0) || !(up.delta > 0.0)) return {};
  return {up.eta / (margin * std::sqrt(up.delta)), false};
}

double bound_papr_fullspark(Index n, Index m) {
  if (m < 1 || m > n) throw ConfigError("bound_papr_fullspark: requires 1 <= M <= N");
  return static_cast<double>(n) / static_cast<double>(n - m + 1);
}

double bound_papr_up(double k_tilde_u, double b) { return k_tilde_u * k_tilde_u * b; }

double bound_power_increase(double k_tilde_u, double b) { return bound_papr_up(k_tilde_u, b); }

double power_increase(const ComplexVector& x_dem, const ComplexVector& x_ls) {
  const double denom = x_ls.squaredNorm();
  if (!(denom > 0.0)) throw ConfigError("power_increase: least-squares vector is zero");
  return x_dem.squaredNorm() / denom;
}

std::string TrialRecord::csv_header() {
  return "family,N,M,trial,rho,paprLinear,paprDb,kHatU,kTildeL,extremeCount,powerIncrease,"
         "normInf,normTwo,epsilon,seed,iterations,relativeGap,converged";
}

std::string TrialRecord::csv_row() const {
  std::ostringstream os;
  os << family << ',' << n << ',' << m << ',' << trial << ',' << fmt(rho) << ',' << fmt(paprLinear) << ','
     << fmt(paprDb) << ',' << fmt(kHatU) << ',' << fmt(kTildeL) << ',' << extremeCount << ','
     << fmt(powerIncrease) << ',' << fmt(normInf) << ',' << fmt(normTwo) << ',' << fmt(epsilon) << ','
     << seed << ',' << iterations << ',' << fmt(relativeGap) << ',' << (converged ? 1 : 0);
  return os.str();
}

std::string TrialRecord::json_line() const {
  nlohmann::json j = {{"family", family},     {"N", n},
                      {"M", m},               {"trial", trial},
                      {"rho", rho},           {"paprLinear", paprLinear},
                      {"paprDb", paprDb},     {"kHatU", kHatU},
                      {"kTildeL", kTildeL},   {"extremeCount", extremeCount},
                      {"powerIncrease", powerIncrease}, {"normInf", normInf},
                      {"normTwo", normTwo},   {"epsilon", epsilon},
                      {"seed", seed},         {"iterations", iterations},
                      {"relativeGap", relativeGap}, {"converged", converged}};
  return j.dump();
}

}  // namespace demrep
