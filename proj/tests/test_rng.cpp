#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "demrep/rng.hpp"

using namespace demrep;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
    EXPECT_EQ(a.normal(), b.normal());
  }
}

TEST(Rng, UniformInUnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, UniformIndexCoversRange) {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.uniform_index(7);
    ASSERT_LT(k, 7u);
    ++hits[k];
  }
  for (int h : hits) EXPECT_NEAR(h, 1000, 150);
}

TEST(Rng, NormalMoments) {
  Rng rng(9);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = rng.normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(Rng, ComplexNormalVariance) {
  Rng rng(5);
  const auto v = random_complex_normal(rng, 100000, 0.5);
  EXPECT_NEAR(v.squaredNorm() / 100000.0, 0.5, 0.01);
}

TEST(Rng, RandomSubsetIsSortedAndDistinct) {
  Rng rng(11);
  const auto s = random_subset(rng, 50, 20);
  ASSERT_EQ(s.size(), 20u);
  EXPECT_TRUE(std::is_sorted(s.begin(), s.end()));
  EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 20u);
  for (Index k : s) {
    EXPECT_GE(k, 0);
    EXPECT_LT(k, 50);
  }
  EXPECT_EQ(random_subset(rng, 5, 5), (std::vector<Index>{0, 1, 2, 3, 4}));
}

TEST(Rng, DerivedSeedsDiffer) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t a = 0; a < 20; ++a)
    for (std::uint64_t b = 0; b < 20; ++b) seen.insert(derive_seed(1, a, b));
  EXPECT_EQ(seen.size(), 400u);
  EXPECT_EQ(derive_seed(7, 3, 4), derive_seed(7, 3, 4));
  EXPECT_NE(derive_seed(7, 3, 4), derive_seed(8, 3, 4));
}
