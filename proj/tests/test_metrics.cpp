#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "demrep/frames.hpp"
#include "demrep/metrics.hpp"
#include "demrep/solvers.hpp"
#include "oracles.hpp"

using namespace demrep;

namespace {

ComplexVector vec(std::initializer_list<Complex> v) {
  ComplexVector out(static_cast<Index>(v.size()));
  Index k = 0;
  for (auto c : v) out(k++) = c;
  return out;
}

/// PAPR of the trigonometric interpolant of x evaluated on a `fine`-times grid
/// directly from the DFT sum.
double papr_fine_grid(const ComplexVector& x, int fine) {
  const Index n = x.size();
  const ComplexVector spec = oracle::dft_matrix(n) * x;
  double peak = 0.0, power = 0.0;
  const Index len = n * fine;
  for (Index t = 0; t < len; ++t) {
    Complex v = 0.0;
    for (Index k = 0; k < n; ++k) {
      double freq = static_cast<double>(k);
      double weight = 1.0;
      if (2 * k > n) freq -= static_cast<double>(n);
      if (2 * k == n) weight = 0.5;
      v += weight * spec(k) * std::polar(1.0, 2.0 * std::numbers::pi * freq * t / static_cast<double>(len));
      if (2 * k == n) v += weight * spec(k) * std::polar(1.0, -2.0 * std::numbers::pi * freq * t / static_cast<double>(len));
    }
    peak = std::max(peak, std::norm(v));
    power += std::norm(v);
  }
  return peak / (power / static_cast<double>(len));
}

}  // namespace

TEST(Papr, Examples) {
  EXPECT_NEAR(papr(vec({1.0, Complex(0, 1), -1.0, Complex(0.6, 0.8)})), 1.0, 1e-15);
  EXPECT_NEAR(papr(vec({0.0, 0.0, 3.0, 0.0, 0.0})), 5.0, 1e-15);
  EXPECT_NEAR(papr(vec({2.0, 1.0, 1.0})), 2.0, 1e-15);
  EXPECT_NEAR(papr_db(vec({2.0, 1.0, 1.0})), 10.0 * std::log10(2.0), 1e-15);
  EXPECT_THROW(papr(ComplexVector::Zero(3)), ConfigError);
}

TEST(PaprOversampled, FactorOneIsPlainPapr) {
  std::mt19937_64 gen(1);
  const ComplexVector x = oracle::random_vector(gen, 32);
  EXPECT_NEAR(papr_oversampled(x, 1), papr(x), 1e-12);
  EXPECT_THROW(papr_oversampled(x, 0), ConfigError);
}

TEST(PaprOversampled, PureToneIsFlat) {
  for (Index n : {16, 17}) {
    for (Index tone : {Index{0}, Index{3}, n - 2}) {
      ComplexVector x(n);
      for (Index t = 0; t < n; ++t)
        x(t) = std::polar(1.0, 2.0 * std::numbers::pi * static_cast<double>(tone * t) / static_cast<double>(n));
      EXPECT_NEAR(papr_oversampled(x, 4), 1.0, 1e-9) << n << " " << tone;
    }
  }
}

TEST(PaprOversampled, PreservesPowerAndSamples) {
  std::mt19937_64 gen(2);
  for (Index n : {24, 25}) {
    const ComplexVector x = oracle::random_vector(gen, n);
    const ComplexVector up = oversample(x, 4);
    EXPECT_EQ(up.size(), 4 * n);
    for (Index t = 0; t < n; ++t) EXPECT_LE(std::abs(up(4 * t) - x(t)), 1e-12);
    // Splitting the Nyquist bin halves its energy, so only odd N keeps power exactly.
    const double nyquist = n % 2 == 0 ? std::norm((oracle::dft_matrix(n) * x)(n / 2)) / 2.0 : 0.0;
    EXPECT_NEAR(up.squaredNorm() / 4.0, x.squaredNorm() - nyquist, 1e-12 * x.squaredNorm());
  }
}

TEST(PaprOversampled, MatchesDirectInterpolation) {
  std::mt19937_64 gen(3);
  for (Index n : {8, 9}) {
    const ComplexVector x = oracle::random_vector(gen, n);
    EXPECT_NEAR(papr_oversampled(x, 4), papr_fine_grid(x, 4), 1e-10);
  }
}

TEST(PaprOversampled, NeverBelowCritical) {
  std::mt19937_64 gen(4);
  for (int t = 0; t < 100; ++t) {
    const ComplexVector x = oracle::random_vector(gen, 64);
    const double crit = papr(x), over = papr_oversampled(x, 4);
    EXPECT_GE(over, crit - 1e-9);
    if (t < 5) { EXPECT_LE(over, papr_oversampled(x, 64) + 1e-9); }
  }
}

TEST(PadSpectrum, Layout) {
  const ComplexVector s = vec({1.0, 2.0, 3.0, 4.0});
  const ComplexVector p = pad_spectrum(s, 2);
  ASSERT_EQ(p.size(), 8);
  EXPECT_EQ(p(0), Complex(1.0));
  EXPECT_EQ(p(1), Complex(2.0));
  EXPECT_EQ(p(2), Complex(1.5));
  EXPECT_EQ(p(6), Complex(1.5));
  EXPECT_EQ(p(7), Complex(4.0));
  EXPECT_EQ(p(3), Complex(0.0));
}

TEST(CountExtreme, Examples) {
  EXPECT_EQ(count_extreme(vec({1.0, 1.0, 0.2})), 2);
  EXPECT_EQ(count_extreme(vec({1.0, Complex(0, 1), -1.0})), 3);
  EXPECT_EQ(count_extreme(vec({1.0, 0.999995})), 2);
  EXPECT_EQ(count_extreme(vec({1.0, 0.9999})), 1);
  EXPECT_THROW(count_extreme(ComplexVector::Zero(2)), ConfigError);
}

TEST(CountExtreme, SolvedGaussianHasManyExtremeEntries) {
  Rng rng(5);
  const auto f = build_gaussian(32, 8, rng);
  const ComplexVector y = random_complex_normal(rng, 8);
  SolverConfig cfg;
  cfg.tolGap = 1e-9;
  const auto r = solve_cram(f, y, cfg);
  EXPECT_GE(count_extreme(r.x, 1e-4), 25);
}

TEST(EmpiricalKu, Examples) {
  std::vector<Index> rows(8);
  for (Index k = 0; k < 8; ++k) rows[static_cast<std::size_t>(k)] = k;
  const auto f = FrameOperator::subsampled_dft(8, rows);
  ComplexVector e1 = ComplexVector::Zero(8);
  e1(0) = 1.0;
  EXPECT_NEAR(empirical_ku(f.adjoint(e1), e1, 0.0), 1.0, 1e-12);
  EXPECT_NEAR(empirical_ku(vec({0.5, 0.5}), vec({1.0}), 0.0), std::sqrt(2.0) * 0.5, 1e-15);
  EXPECT_THROW(empirical_ku(vec({0.0, 0.0}), vec({1.0}), 1.0), ConfigError);
}

TEST(Bounds, PlugIns) {
  EXPECT_EQ(bound_lower_democracy({1.0, 1.0, BoundsMethod::ExactEig}), 1.0);
  EXPECT_EQ(bound_lower_democracy({1.0, 4.0, BoundsMethod::ExactEig}), 0.5);

  UPCertificate up;
  up.eta = 0.5;
  up.delta = 0.25;
  auto ku = bound_upper_democracy({1.0, 1.0, BoundsMethod::ExactEig}, up);
  EXPECT_FALSE(ku.vacuous);
  EXPECT_NEAR(ku.value, 2.0, 1e-15);
  up.eta = 1.0;
  ku = bound_upper_democracy({1.0, 1.0, BoundsMethod::ExactEig}, up);
  EXPECT_TRUE(ku.vacuous);
  EXPECT_TRUE(std::isinf(ku.value));

  EXPECT_EQ(bound_papr_fullspark(100, 1), 1.0);
  EXPECT_NEAR(bound_papr_fullspark(128, 64), 128.0 / 65.0, 1e-15);
  EXPECT_NEAR(to_db(bound_papr_fullspark(128, 64)), 2.94, 0.005);
  EXPECT_EQ(bound_papr_up(2.0, 1.0), 4.0);
  EXPECT_EQ(bound_power_increase(2.0, 1.0), 4.0);
  EXPECT_TRUE(std::isinf(bound_papr_up(std::numeric_limits<double>::infinity(), 1.0)));
}

TEST(PowerIncrease, Examples) {
  std::mt19937_64 gen(6);
  const ComplexVector x = oracle::random_vector(gen, 5);
  EXPECT_NEAR(power_increase(x, x), 1.0, 1e-15);
  EXPECT_NEAR(power_increase(vec({0.5, 0.5}), vec({0.5, 0.5})), 1.0, 1e-15);
  EXPECT_THROW(power_increase(x, ComplexVector::Zero(5)), ConfigError);

  Rng rng(7);
  const auto f = build_subsampled_dft(128, 32, rng);
  const ComplexVector y = random_complex_normal(rng, 32);
  const auto r = solve_cramp(f, y, {});
  EXPECT_GE(power_increase(r.x, solve_least_squares(f, y, 0.0)), 1.0 - 1e-9);
}

TEST(Bounds, FullSparkInvariantsOnSolvedInstances) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const auto f = build_gaussian(64, 16, rng);
    const ComplexVector y = random_complex_normal(rng, 16);
    SolverConfig cfg;
    cfg.tolGap = 1e-9;
    const auto r = solve_cram(f, y, cfg);
    const double ninf = norm_inf(r.x);
    EXPECT_LE(std::sqrt(64.0 - 16.0 + 1.0) * ninf, r.x.norm() + 1e-8);
    EXPECT_LE(papr(r.x), bound_papr_fullspark(64, 16) + 1e-6);
    EXPECT_GE(ninf, y.norm() / std::sqrt(64.0 * frame_bounds(f).upper) - 1e-9);
  }
}

TEST(Bounds, EpsilonHasLittleEffectOnPapr) {
  std::vector<double> spread;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(1000 + seed);
    const auto f = build_gaussian(32, 8, rng);
    const ComplexVector y = random_complex_normal(rng, 8);
    double lo = 1e300, hi = -1e300;
    for (double frac : {0.0, 0.1, 0.3}) {
      SolverConfig cfg;
      cfg.epsilon = frac * y.norm();
      const double p = papr_db(solve_cram(f, y, cfg).x);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
    spread.push_back(hi - lo);
  }
  std::nth_element(spread.begin(), spread.begin() + 25, spread.end());
  EXPECT_LT(spread[25], 0.5);
}

TEST(TrialRecord, CsvShape) {
  TrialRecord r;
  r.family = "gaussian";
  r.n = 8;
  r.m = 4;
  r.paprDb = 1.5;
  const auto header = TrialRecord::csv_header();
  const auto row = r.csv_row();
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(row.begin(), row.end(), ','));
  EXPECT_EQ(row.rfind("gaussian,8,4,", 0), 0u);
  const auto j = nlohmann::json::parse(r.json_line());
  EXPECT_EQ(j.at("paprDb").get<double>(), 1.5);
}
