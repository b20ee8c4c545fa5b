#include "polsar/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

using polsar::CounterRng;

// Reference SplitMix64 outputs for state 0.
TEST(CounterRng, MatchesSplitMix64ReferenceForZeroKey) {
  CounterRng rng(0, 0);
  EXPECT_EQ(rng.next_u64(), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(rng.next_u64(), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(rng.next_u64(), 0x06C45D188009454FULL);
  EXPECT_EQ(rng.counter(), 3U);
}

TEST(CounterRng, StreamsAreReproducibleAndDistinct) {
  CounterRng a(42, 7);
  CounterRng b(42, 7);
  CounterRng c(42, 8);
  CounterRng d(43, 7);
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  EXPECT_EQ(same_c, 0);
  EXPECT_EQ(same_d, 0);
}

TEST(CounterRng, UniformMoments) {
  CounterRng rng(1, 2);
  double sum = 0.0;
  double sq = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(CounterRng, NormalAndCircularMoments) {
  CounterRng rng(3, 4);
  constexpr int n = 200000;
  double m = 0.0;
  double v = 0.0;
  std::complex<double> cm{};
  double cp = 0.0;
  std::complex<double> pseudo{};
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    m += x;
    v += x * x;
    const auto z = rng.circular_normal();
    cm += z;
    cp += std::norm(z);
    pseudo += z * z;
  }
  EXPECT_NEAR(m / n, 0.0, 0.01);
  EXPECT_NEAR(v / n, 1.0, 0.015);
  EXPECT_NEAR(std::abs(cm) / n, 0.0, 0.01);
  EXPECT_NEAR(cp / n, 1.0, 0.015);
  EXPECT_NEAR(std::abs(pseudo) / n, 0.0, 0.015);
}

TEST(CounterRng, BelowIsInRangeAndRoughlyUniform) {
  CounterRng rng(5);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = rng.below(7);
    ASSERT_LT(k, 7U);
    ++hist[k];
  }
  for (int h : hist) {
    EXPECT_NEAR(h, 10000, 500);
  }
  EXPECT_EQ(rng.below(1), 0U);
}

TEST(CounterRng, ShuffleIsAPermutationAndSeeded) {
  std::vector<int> a(50);
  std::iota(a.begin(), a.end(), 0);
  auto b = a;
  CounterRng r1(9, 1);
  CounterRng r2(9, 1);
  r1.shuffle(std::span<int>(a));
  r2.shuffle(std::span<int>(b));
  EXPECT_EQ(a, b);
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> expect(50);
  std::iota(expect.begin(), expect.end(), 0);
  EXPECT_EQ(sorted, expect);
  EXPECT_NE(a, expect);
}
