#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sbd/geometry.hpp"

using namespace sbd;

namespace {

std::vector<Point> random_points(int n, const Torus& t, CounterRng& rng) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back(t.uniform_point(rng));
  return pts;
}

double product_plus_one(std::span<const Point> eta, double (*g)(const Point&)) {
  double p = 1.0;
  for (const auto& x : eta) p *= 1.0 + g(x);
  return p;
}

double bump(const Point& x) { return 0.3 + 0.8 * std::sin(1.7 * x[0]) * std::cos(x[1]); }

}  // namespace

TEST(Torus, WrapAndContain) {
  const Torus t(2, 4.0);
  const Point p = t.wrap(Point{-0.5, 9.0});
  EXPECT_NEAR(p[0], 3.5, 1e-12);
  EXPECT_NEAR(p[1], 1.0, 1e-12);
  EXPECT_TRUE(t.contains(p));
  EXPECT_FALSE(t.contains(Point{4.0, 0.0}));
  EXPECT_DOUBLE_EQ(t.volume(), 16.0);
}

TEST(Torus, DistanceIsAMetric) {
  const Torus t(3, 5.0);
  CounterRng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Point a = t.uniform_point(rng), b = t.uniform_point(rng), c = t.uniform_point(rng);
    EXPECT_NEAR(torus_distance(a, b, t), torus_distance(b, a, t), 1e-14);
    EXPECT_EQ(torus_distance(a, a, t), 0.0);
    EXPECT_GT(torus_distance(a, b, t), 0.0);
    EXPECT_LE(torus_distance(a, c, t), torus_distance(a, b, t) + torus_distance(b, c, t) + 1e-12);
    EXPECT_LE(torus_distance(a, b, t), std::sqrt(3.0) * 2.5 + 1e-12);
  }
}

TEST(Torus, DistanceUsesShortestImage) {
  const Torus t(1, 10.0);
  EXPECT_NEAR(torus_distance(Point{0.5}, Point{9.5}, t), 1.0, 1e-12);
}

TEST(FiniteConfiguration, RejectsCoincidentPoints) {
  EXPECT_THROW(FiniteConfiguration({Point{1.0}, Point{1.0}}), InputError);
  EXPECT_THROW(FiniteConfiguration({Point{1.0}, Point{1.0, 2.0}}), InputError);
  EXPECT_THROW(FiniteConfiguration({Point{11.0}}, Torus(1, 10.0)), InputError);
  FiniteConfiguration c({Point{1.0}, Point{2.0}});
  EXPECT_EQ(c.size(), 2u);
}

TEST(Combinatorics, EmptySubsetSum) {
  const std::vector<Point> none;
  EXPECT_EQ(subsets_sum(std::span<const Point>(none), [](std::span<const Point>) { return 2.5; }), 2.5);
}

TEST(Combinatorics, SubsetProductIdentity) {
  const Torus t(2, 6.0);
  CounterRng rng(17);
  for (int n = 0; n <= 10; ++n) {
    const auto eta = random_points(n, t, rng);
    const double lhs = subsets_sum(std::span<const Point>(eta), [](std::span<const Point> xi) {
      double p = 1.0;
      for (const auto& x : xi) p *= bump(x);
      return p;
    });
    const double rhs = product_plus_one(eta, bump);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(rhs)) << "n=" << n;
  }
}

TEST(Combinatorics, SubsetCountIsPowerOfTwo) {
  const Torus t(1, 6.0);
  CounterRng rng(1);
  const auto eta = random_points(7, t, rng);
  EXPECT_EQ(subsets_sum(std::span<const Point>(eta), [](std::span<const Point>) { return 1.0; }), 128.0);
}

TEST(Combinatorics, MoebiusInversionBothWays) {
  const Torus t(2, 6.0);
  CounterRng rng(23);
  auto G = [](std::span<const Point> xi) {
    double s = 0.0;
    for (const auto& x : xi) s += std::sin(x[0]) + x[1] * x[1];
    return std::exp(-0.1 * s) + static_cast<double>(xi.size());
  };
  for (int n = 0; n <= 6; ++n) {
    const auto eta = random_points(n, t, rng);
    auto KG = [&](std::span<const Point> xi) { return k_transform(G, xi); };
    auto KinvG = [&](std::span<const Point> xi) { return k_inverse(G, xi); };
    const double g = G(std::span<const Point>(eta));
    EXPECT_NEAR(k_inverse(KG, std::span<const Point>(eta)), g, 1e-12 * std::max(1.0, std::abs(g)));
    EXPECT_NEAR(k_transform(KinvG, std::span<const Point>(eta)), g, 1e-12 * std::max(1.0, std::abs(g)));
  }
}

TEST(Combinatorics, OrderInvariance) {
  const Torus t(2, 6.0);
  CounterRng rng(29);
  auto eta = random_points(8, t, rng);
  auto f = [](std::span<const Point> xi) {
    double s = 1.0;
    for (const auto& x : xi) s *= 0.5 + std::cos(x[0] * x[1]);
    return s;
  };
  const double ref = subsets_sum(std::span<const Point>(eta), f);
  for (int k = 0; k < 5; ++k) {
    std::rotate(eta.begin(), eta.begin() + 3, eta.end());
    std::swap(eta[1], eta[5]);
    EXPECT_NEAR(subsets_sum(std::span<const Point>(eta), f), ref, 1e-12 * std::abs(ref));
  }
}

TEST(Combinatorics, EnumerationCap) {
  const Torus t(1, 100.0);
  CounterRng rng(2);
  const auto eta = random_points(21, t, rng);
  EXPECT_THROW(subsets_sum(std::span<const Point>(eta), [](std::span<const Point>) { return 1.0; }), SizeError);
}

TEST(LebesguePoisson, ConvergesWithinTailBound) {
  // g = c on [1, 3) in a line of length 10, aligned with both grids; integral of g is 2 c
  const Torus t(1, 10.0);
  const double c = 0.8;
  auto G = [&](std::span<const Point> pts) {
    double p = 1.0;
    for (const auto& x : pts) p *= (x[0] >= 1.0 && x[0] < 3.0) ? c : 0.0;
    return p;
  };
  const double exact = std::exp(2.0 * c);
  double prev_err = 1e300;
  for (int order = 0; order <= 6; ++order) {
    const int ppa = order <= 4 ? 20 : 10;
    const auto est = lp_integral(G, order, t, GridQuadrature{ppa});
    const double w = 2.0 * c;
    double tail = 0.0, term = 1.0;
    for (int n = 1; n < 60; ++n) {
      term *= w / n;
      if (n > order) tail += term;
    }
    const double err = std::abs(est.value - exact);
    EXPECT_LE(err, tail * (1 + 1e-10));
    EXPECT_LT(err, prev_err);
    prev_err = err;
    ASSERT_EQ(est.by_order.size(), static_cast<std::size_t>(order + 1));
    EXPECT_EQ(est.by_order[0], 1.0);
  }
}

TEST(LebesguePoisson, MonteCarloMatchesGridWithinError) {
  const Torus t(2, 3.0);
  auto G = [](std::span<const Point> pts) {
    double p = 1.0;
    for (const auto& x : pts) p *= 0.3 * std::exp(-0.5 * (x[0] - 1.5) * (x[0] - 1.5));
    return p;
  };
  const auto grid = lp_integral(G, 3, t, GridQuadrature{24});
  const auto mc = lp_integral(G, 3, t, MonteCarloQuadrature{4000, 9});
  EXPECT_GT(mc.std_error, 0.0);
  EXPECT_NEAR(mc.value, grid.value, 5.0 * mc.std_error + 1e-3);
}

TEST(LebesguePoisson, OrderCap) {
  const Torus t(1, 1.0);
  auto one = [](std::span<const Point>) { return 1.0; };
  EXPECT_THROW(lp_integral(one, 7, t, GridQuadrature{4}), SizeError);
  EXPECT_THROW(lp_integral(one, -1, t, GridQuadrature{4}), SizeError);
}

TEST(LebesguePoisson, NonFiniteIntegrandRejected) {
  const Torus t(1, 1.0);
  auto bad = [](std::span<const Point> pts) { return pts.empty() ? 1.0 : std::nan(""); };
  EXPECT_THROW(lp_integral(bad, 2, t, GridQuadrature{4}), EvaluationError);
}

TEST(Geometry, BallVolume) {
  EXPECT_DOUBLE_EQ(ball_volume(1, 0.5), 1.0);
  EXPECT_NEAR(ball_volume(2, 1.0), M_PI, 1e-15);
  EXPECT_NEAR(ball_volume(3, 1.0), 4.0 * M_PI / 3.0, 1e-15);
}
