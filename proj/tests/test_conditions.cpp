#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "sbd/conditions.hpp"

using namespace sbd;

namespace {

RateModel glauber(double z_minus, const Potential& psi = Potential::zero()) {
  return RateModel(GlauberGlauber{z_minus, psi, 0.3, Potential::step(1.0, 0.5), Potential::step(1.0, 0.5)});
}

CheckOptions no_spot() {
  CheckOptions o;
  o.spot_check = false;
  return o;
}

}  // namespace

TEST(Conditions, SourgailisConstants) {
  const auto r = check_regime(glauber(0.5), RegimeParams{2.0, 1.0}, no_spot());
  EXPECT_DOUBLE_EQ(r.a_minus, 1.25);
  EXPECT_TRUE(r.e2_ok);
  EXPECT_DOUBLE_EQ(r.m_star_minus, 1.0);
  EXPECT_EQ(r.lambda0, (2.0 - r.a_minus) * r.m_star_minus);
  EXPECT_LE(r.omega0, M_PI / 4.0);
  EXPECT_GT(r.omega0, 0.0);
}

TEST(Conditions, EnvironmentConstantDecreasesInC) {
  const auto m = glauber(0.8);
  double prev = kInf;
  for (double c : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    const auto r = check_regime(m, RegimeParams{c, 1.0}, no_spot());
    EXPECT_NEAR(r.a_minus, 1.0 + 0.8 / c, 1e-15);
    EXPECT_LT(r.a_minus, prev);
    prev = r.a_minus;
  }
}

TEST(Conditions, LambdaZeroIdentityOnEveryFeasibleCheck) {
  const auto m = glauber(0.4, Potential::step(0.5, 0.5));
  for (double c : {0.5, 1.0, 2.0, 3.0})
    for (double cp : {0.5, 1.0, 2.0}) {
      const auto r = check_regime(m, RegimeParams{c, cp}, no_spot());
      if (r.e2_ok) EXPECT_EQ(r.lambda0, (2.0 - r.a_minus) * r.m_star_minus);
      else EXPECT_EQ(r.lambda0, 0.0);
    }
}

TEST(Conditions, InfeasibleEnvironmentReported) {
  const auto r = check_regime(glauber(3.0), RegimeParams{1.0, 1.0}, no_spot());
  EXPECT_FALSE(r.e2_ok);
  EXPECT_FALSE(r.all_ok());
  EXPECT_FALSE(r.details.empty());
}

TEST(Conditions, GapAndAngle) {
  const auto g = spectral_gap_and_angle(1.5, 2.0);
  EXPECT_DOUBLE_EQ(g.lambda0, 1.0);
  EXPECT_LE(g.omega0, M_PI / 4.0);
  EXPECT_EQ(spectral_gap_and_angle(1.0 + 1e-9, 1.0).omega0, M_PI / 4.0);
}

TEST(Conditions, ScanIsReproducibleAndOrderIndependent) {
  const auto m = glauber(0.5, Potential::step(0.3, 0.5));
  const std::vector<double> cm{0.5, 1.0, 2.0, 4.0}, cp{0.5, 1.0, 2.0};
  auto grid = regime_grid(cm, cp);
  const auto a = scan_feasible(m, grid, no_spot());
  std::reverse(grid.begin(), grid.end());
  const auto b = scan_feasible(m, grid, no_spot());
  std::rotate(grid.begin(), grid.begin() + 5, grid.end());
  const auto c = scan_feasible(m, grid, no_spot());
  ASSERT_TRUE(a.feasible);
  EXPECT_EQ(a.report.regime, b.report.regime);
  EXPECT_EQ(a.report.regime, c.report.regime);
  EXPECT_EQ(a.report.lambda0, b.report.lambda0);
  EXPECT_EQ(a.evaluated, grid.size());
}

TEST(Conditions, ScanTieBreaksTowardSmallC) {
  // With psi = 0 lambda0 is 1 - z/C-, so the scan prefers the largest C- for the gap;
  // C+ does not affect the environment, so the smallest feasible C+ wins the tie.
  const auto m = glauber(0.5);
  const std::vector<double> cm{1.0, 4.0}, cp{1.0, 2.0, 3.0};
  const auto s = scan_feasible(m, regime_grid(cm, cp), no_spot(), ScanScope::environment_only);
  ASSERT_TRUE(s.feasible);
  EXPECT_EQ(s.report.regime.c_minus, 4.0);
  EXPECT_EQ(s.report.regime.c_plus, 1.0);
}

TEST(Conditions, SpotCheckHoldsForEveryVariant) {
  BdlpInGlauber bdlp;
  bdlp.z_minus = 0.3;
  bdlp.psi = Potential::step(0.5, 0.5);
  bdlp.m_plus = 4.0;
  bdlp.a_minus = Potential::step(0.4, 0.5);
  bdlp.a_plus = Potential::step(0.2, 0.5);
  bdlp.b_minus = Potential::step(0.3, 0.5);
  bdlp.b_plus = Potential::step(0.1, 0.5);
  BranchingInGlauber br;
  br.z_minus = 0.3;
  br.m_plus = 4.0;
  br.kappa = Potential::step(0.1, 0.5);
  br.phi = Potential::step(0.2, 0.5);
  br.a_plus = Potential::step(0.05, 0.5);
  TwoBdlp two;
  two.z = 0.5;
  two.m_minus = 3.0;
  two.a_minus = Potential::step(0.5, 0.5);
  two.a_plus = Potential::step(0.2, 0.5);
  two.m_plus = 3.0;
  two.b_minus = Potential::step(0.3, 0.5);
  two.b_plus = Potential::step(0.1, 0.5);
  two.vphi_minus = Potential::step(0.3, 0.5);
  two.vphi_plus = Potential::step(0.1, 0.5);
  const RateModel gg(GlauberGlauber{0.3, Potential::step(0.5, 0.5), 0.1, Potential::step(1.0, 0.5), Potential::step(1.0, 0.5)});
  const std::vector<RateModel> models{gg, RateModel(bdlp), RateModel(br),
                                      RateModel(two)};
  CheckOptions o;
  o.spot.configurations = 100;
  o.spot.mc_points = 128;
  for (const auto& m : models) {
    const auto r = check_regime(m, RegimeParams{1.0, 1.0}, o);
    ASSERT_TRUE(r.spot.has_value());
    EXPECT_TRUE(r.spot->passed()) << m.name() << ": " << r.spot->failures << " failures";
    EXPECT_GT(r.spot->checked, 0);
    EXPECT_TRUE(r.all_ok()) << m.name();
  }
}

TEST(Conditions, LinearBirthBound) {
  EXPECT_TRUE(linear_birth_bound(glauber(0.5)).first);
}

TEST(Conditions, AveragedConstantFromModelIsNoWorseThanPrior) {
  const auto m = glauber(0.5);
  const double prior = averaged_constants(m, RegimeParams{1.0, 1.0}, 1);
  EXPECT_NEAR(prior, 1.0 + 0.3 * std::exp(1.0 * Potential::step(1.0, 0.5).beta(1)), 1e-12);
}
