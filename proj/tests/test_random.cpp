#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "sbd/random.hpp"

using sbd::CounterRng;
using sbd::Philox4x32;

// Published known-answer vectors for Philox4x32 with 10 rounds.
TEST(Philox, KnownAnswerZero) {
  const auto out = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(out, (Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
}

TEST(Philox, KnownAnswerOnes) {
  const auto out = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(out, (Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
}

TEST(Philox, KnownAnswerPi) {
  const auto out = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(out, (Philox4x32::Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(CounterRng, DeterministicPerSeedAndStream) {
  CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_stream = false, differs_seed = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    EXPECT_EQ(x, b.next_u32());
    differs_stream |= x != c.next_u32();
    differs_seed |= x != d.next_u32();
  }
  EXPECT_TRUE(differs_stream);
  EXPECT_TRUE(differs_seed);
  EXPECT_EQ(a.position(), 100u);
}

TEST(CounterRng, CopiesContinueIndependently) {
  CounterRng a(1);
  a.next_u32();
  CounterRng b = a;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(a.next_u32(), b.next_u32());
}

TEST(CounterRng, UniformMoments) {
  CounterRng r(7);
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 2e-3);
}

TEST(CounterRng, ExponentialAndPoissonMeans) {
  CounterRng r(11);
  const int n = 100000;
  double se = 0.0, sp = 0.0, sp_big = 0.0;
  for (int i = 0; i < n; ++i) {
    se += r.exponential(2.0);
    sp += static_cast<double>(r.poisson(3.5));
  }
  for (int i = 0; i < 20000; ++i) sp_big += static_cast<double>(r.poisson(75.0));
  EXPECT_NEAR(se / n, 0.5, 5.0 * 0.5 / std::sqrt(n));
  EXPECT_NEAR(sp / n, 3.5, 5.0 * std::sqrt(3.5 / n));
  EXPECT_NEAR(sp_big / 20000, 75.0, 5.0 * std::sqrt(75.0 / 20000));
}

TEST(CounterRng, IndexCoversRange) {
  CounterRng r(5);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.index(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}
