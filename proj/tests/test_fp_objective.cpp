#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "prafd/fp_objective.hpp"
#include "prafd/rng.hpp"
#include "suites.hpp"

using namespace prafd;
using verify::detail::random_matrix;

namespace {

ScenarioConfig dims(int kd, int ku, int nt, int nr) {
  ScenarioConfig c;
  c.K_D = kd;
  c.K_U = ku;
  c.N_t = nt;
  c.N_r = nr;
  return c;
}

Channels random_channels(const ScenarioConfig& c, Rng& rng, double scale = 1e-5) {
  return {random_matrix(rng, c.N_t, c.K_D, scale * scale), random_matrix(rng, c.N_r, c.K_U, scale * scale),
          random_matrix(rng, c.N_r, c.N_t, 1e-9), random_matrix(rng, c.K_D, c.K_U, 1e-9)};
}

SolverState random_state(const ScenarioConfig& c, const Channels& ch, Rng& rng) {
  return verify::detail::random_state(c, ch, rng);
}

}  // namespace

TEST(Sinr, SingleDownlinkUserAtNoiseLevelHasUnitSinr) {
  auto c = dims(1, 0, 1, 1);
  c.sigma2 = 2.0;
  Channels ch{Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Zero(1, 1),
              Eigen::MatrixXcd(1, 0)};
  SolverState st;
  st.W_t = Eigen::MatrixXcd::Constant(1, 1, cd(0.0, std::sqrt(2.0)));
  st.W_r = Eigen::MatrixXcd(1, 0);
  st.p_u = Eigen::VectorXd(0);
  EXPECT_NEAR(sinr_downlink(st, ch, c)(0), 1.0, 1e-15);
  EXPECT_NEAR(weighted_sum_rate(st, ch, c), 1.0, 1e-15);
}

TEST(Sinr, ZeroBeamformerGivesZeroSinrAndRate) {
  Rng rng(3);
  const auto c = dims(2, 2, 3, 3);
  const auto ch = random_channels(c, rng);
  auto st = random_state(c, ch, rng);
  st.W_t.setZero();
  st.p_u.setZero();
  EXPECT_EQ(sinr_downlink(st, ch, c).maxCoeff(), 0.0);
  EXPECT_EQ(sinr_uplink(st, ch, c).maxCoeff(), 0.0);
  EXPECT_EQ(weighted_sum_rate(st, ch, c), 0.0);
}

TEST(Sinr, UnitUplinkSinrAgainstExpansion) {
  auto c = dims(0, 1, 1, 1);
  c.sigma2 = 0.5;
  Channels ch{Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Constant(1, 1, cd(0.0, 1.0)), Eigen::MatrixXcd::Zero(1, 1),
              Eigen::MatrixXcd(0, 1)};
  SolverState st;
  st.W_t = Eigen::MatrixXcd(1, 0);
  st.W_r = Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0));
  st.p_u = Eigen::VectorXd::Constant(1, 0.5);
  EXPECT_NEAR(sinr_uplink(st, ch, c)(0), 1.0, 1e-15);
}

TEST(Sinr, MatchesReceivedSignalExpansion) {
  Rng rng(17);
  for (int rep = 0; rep < 50; ++rep) {
    auto c = verify::detail::small_config(rng);
    const auto ch = random_channels(c, rng);
    const auto st = random_state(c, ch, rng);
    const auto dl = sinr_downlink(st, ch, c);
    const auto ul = sinr_uplink(st, ch, c);
    const auto dl_ref = oracle::downlink_sinr_direct(ch.dl, st.W_t, ch.iui, st.p_u, c.sigma2);
    const auto ul_ref = oracle::uplink_sinr_direct(ch.ul, ch.si, st.W_t, st.W_r, st.p_u, c.sigma2);
    for (int k = 0; k < c.K_D; ++k) EXPECT_NEAR(dl(k), dl_ref[k], 1e-10 * (1.0 + dl_ref[k]));
    for (int k = 0; k < c.K_U; ++k) EXPECT_NEAR(ul(k), ul_ref[k], 1e-10 * (1.0 + ul_ref[k]));
  }
}

TEST(Sinr, UplinkInvariantToReceiveColumnScaling) {
  Rng rng(5);
  const auto c = dims(2, 3, 3, 4);
  const auto ch = random_channels(c, rng);
  auto st = random_state(c, ch, rng);
  const auto before = sinr_uplink(st, ch, c);
  for (int u = 0; u < c.K_U; ++u) st.W_r.col(u) *= cd(rng.uniform(0.1, 10.0), rng.uniform(-3.0, 3.0));
  const auto after = sinr_uplink(st, ch, c);
  for (int u = 0; u < c.K_U; ++u) EXPECT_NEAR(after(u), before(u), 1e-12 * before(u));
}

TEST(Sinr, ZeroReceiveColumnIsADomainError) {
  Rng rng(8);
  const auto c = dims(1, 2, 2, 2);
  const auto ch = random_channels(c, rng);
  auto st = random_state(c, ch, rng);
  st.W_r.col(1).setZero();
  EXPECT_THROW(sinr_uplink(st, ch, c), DomainError);
}

TEST(WeightedSumRate, SinrThreeWithUnitWeightIsTwoBits) {
  auto c = dims(1, 0, 1, 1);
  c.sigma2 = 1.0;
  Channels ch{Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Zero(1, 1),
              Eigen::MatrixXcd(1, 0)};
  SolverState st{Eigen::MatrixXcd::Constant(1, 1, cd(std::sqrt(3.0), 0.0)), Eigen::MatrixXcd(1, 0), Eigen::VectorXd(0),
                 {}, {}};
  EXPECT_NEAR(weighted_sum_rate(st, ch, c), 2.0, 1e-14);
}

TEST(WeightedSumRate, UsesConfiguredWeights) {
  Rng rng(21);
  auto c = dims(1, 1, 2, 2);
  c.weights = {0.9, 0.1};
  const auto ch = random_channels(c, rng);
  const auto st = random_state(c, ch, rng);
  const double expect = 0.9 * downlink_rates(st, ch, c)(0) + 0.1 * uplink_rates(st, ch, c)(0);
  EXPECT_NEAR(weighted_sum_rate(st, ch, c), expect, 1e-14 * (1.0 + expect));
}

TEST(LagrangianDual, GammaUpdateReturnsTheSinrs) {
  Rng rng(2);
  const auto c = dims(3, 2, 4, 3);
  const auto ch = random_channels(c, rng);
  const auto st = random_state(c, ch, rng);
  const auto g = update_gamma(st, ch, c);
  EXPECT_TRUE(g.head(3).isApprox(sinr_downlink(st, ch, c)));
  EXPECT_TRUE(g.tail(2).isApprox(sinr_uplink(st, ch, c)));
  EXPECT_NEAR(lagrangian_dual_objective(st, ch, c, g), weighted_sum_rate(st, ch, c), 1e-12);
}

TEST(LagrangianDual, OptimalGammaBeatsPerturbedProbes) {
  Rng rng(4);
  const auto c = dims(2, 2, 3, 3);
  const auto ch = random_channels(c, rng);
  const auto st = random_state(c, ch, rng);
  const auto g = update_gamma(st, ch, c);
  const double best = lagrangian_dual_objective(st, ch, c, g);
  for (int i = 0; i < 100; ++i) {
    Eigen::VectorXd probe = g;
    for (Eigen::Index k = 0; k < probe.size(); ++k) probe(k) = std::max(0.0, g(k) * rng.uniform(0.5, 1.5) + rng.normal() * 0.1);
    EXPECT_LE(lagrangian_dual_objective(st, ch, c, probe), best + 1e-12);
  }
}

TEST(QuadraticTransform, ScalarAuxiliaryExample) {
  // a = 1, gamma = 1, x = 1, total received power 2: y = sqrt(2) / 2.
  auto c = dims(1, 0, 1, 1);
  c.sigma2 = 1.0;
  Channels ch{Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Zero(1, 1),
              Eigen::MatrixXcd(1, 0)};
  SolverState st{Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::MatrixXcd(1, 0), Eigen::VectorXd(0),
                 Eigen::VectorXd::Constant(1, 1.0), {}};
  const auto y = update_y(st, ch, c);
  EXPECT_NEAR(y(0).real(), std::sqrt(2.0) / 2.0, 1e-15);
  EXPECT_NEAR(y(0).imag(), 0.0, 1e-15);
}

TEST(QuadraticTransform, OptimalYBeatsPerturbedProbes) {
  Rng rng(6);
  const auto c = dims(2, 3, 3, 2);
  const auto ch = random_channels(c, rng);
  auto st = random_state(c, ch, rng);
  const double best = quadratic_transform_objective(st, ch, c);
  const Eigen::VectorXcd y0 = st.y;
  for (int i = 0; i < 100; ++i) {
    for (Eigen::Index k = 0; k < y0.size(); ++k) st.y(k) = y0(k) + rng.cscg(1e-2 * std::norm(y0(k)) + 1e-30);
    EXPECT_LE(quadratic_transform_objective(st, ch, c), best + 1e-12 * std::abs(best));
  }
}

TEST(QuadraticTransform, SilentUplinkUserGetsZeroAuxiliary) {
  Rng rng(9);
  const auto c = dims(1, 2, 2, 2);
  const auto ch = random_channels(c, rng);
  auto st = random_state(c, ch, rng);
  st.p_u(0) = 0.0;
  st.gamma = update_gamma(st, ch, c);
  EXPECT_EQ(update_y(st, ch, c)(1), cd(0.0, 0.0));
}

TEST(QuadraticTransform, SandwichIsTightAtTheAuxiliaryOptimum) {
  Rng rng(10);
  for (int rep = 0; rep < 30; ++rep) {
    const auto c = verify::detail::small_config(rng);
    const auto ch = random_channels(c, rng);
    const auto st = random_state(c, ch, rng);
    const double wsr = weighted_sum_rate(st, ch, c);
    EXPECT_NEAR(lagrangian_dual_objective(st, ch, c, st.gamma), wsr, 1e-10 * (1.0 + wsr));
    EXPECT_NEAR(quadratic_transform_objective(st, ch, c), wsr, 1e-10 * (1.0 + wsr));
  }
}

TEST(QuadraticTransform, UplinkDenominatorIncludesTheDesiredUser) {
  // gamma excludes the user's own power from the denominator; y includes it.
  auto c = dims(0, 1, 1, 1);
  c.sigma2 = 1.0;
  Channels ch{Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::MatrixXcd::Zero(1, 1),
              Eigen::MatrixXcd(0, 1)};
  SolverState st{Eigen::MatrixXcd(1, 0), Eigen::MatrixXcd::Constant(1, 1, cd(1.0, 0.0)), Eigen::VectorXd::Constant(1, 1.0),
                 {}, {}};
  st.gamma = update_gamma(st, ch, c);
  EXPECT_NEAR(st.gamma(0), 1.0, 1e-15);
  // y = sqrt(a p (1 + gamma)) x / s with s = p + sigma2 = 2 and a = 1.
  EXPECT_NEAR(update_y(st, ch, c)(0).real(), std::sqrt(2.0) / 2.0, 1e-15);
}
