#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "prafd/beamformer.hpp"
#include "prafd/rng.hpp"
#include "suites.hpp"

using namespace prafd;
using verify::detail::random_matrix;

namespace {

TransmitProblem random_transmit(Rng& rng, int n, int k, int rank) {
  const Eigen::MatrixXcd G = random_matrix(rng, n, rank);
  return {G * G.adjoint(), random_matrix(rng, n, k)};
}

ReceiveProblem random_receive(Rng& rng, int n, int k) {
  const Eigen::MatrixXcd G = random_matrix(rng, n, n + 1);
  ReceiveProblem p{G * G.adjoint(), random_matrix(rng, n, k), Eigen::VectorXcd(k)};
  p.Hr.diagonal().array() += 0.1;
  for (int u = 0; u < k; ++u) p.y(u) = rng.cscg(1.0);
  return p;
}

Eigen::MatrixXcd scalar(cd v) { return Eigen::MatrixXcd::Constant(1, 1, v); }

}  // namespace

TEST(Transmit, ScalarUnconstrainedOptimumInsideBudget) {
  const auto r = solve_transmit_problem({scalar(1.0), scalar(0.5)}, 1.0);
  EXPECT_NEAR(r.W(0, 0).real(), 0.5, 1e-15);
  EXPECT_EQ(r.diag.mu, 0.0);
}

TEST(Transmit, ScalarActiveBudgetGivesUnitMultiplier) {
  // Unconstrained power 4 exceeds 1, so 4 / (1 + mu)^2 = 1.
  const auto r = solve_transmit_problem({scalar(1.0), scalar(2.0)}, 1.0);
  EXPECT_NEAR(r.diag.mu, 1.0, 1e-10);
  EXPECT_NEAR(std::abs(r.W(0, 0)), 1.0, 1e-10);
  EXPECT_TRUE(r.diag.bracket_decreasing);
}

TEST(Transmit, MatchesProjectedGradientOracle) {
  Rng rng(31);
  const auto p = random_transmit(rng, 4, 4, 4);
  const double budget = 0.05 * p.Hbar.squaredNorm();
  const auto r = solve_transmit_problem(p, budget);
  const auto ref = oracle::projected_gradient_qp(p.Ht, p.Hbar, budget);
  const double v = oracle::transmit_objective_direct(p.Ht, p.Hbar, r.W);
  const double v_ref = oracle::transmit_objective_direct(p.Ht, p.Hbar, ref);
  EXPECT_GE(v, v_ref - 1e-9 * std::abs(v_ref));
  EXPECT_NEAR(transmit_objective(p, r.W), v, 1e-10 * std::abs(v));
}

TEST(Transmit, NoFeasiblePerturbationImproves) {
  Rng rng(32);
  const auto p = random_transmit(rng, 3, 2, 3);
  const double budget = 0.5;
  const auto r = solve_transmit_problem(p, budget);
  const double best = transmit_objective(p, r.W);
  for (int i = 0; i < 100; ++i) {
    Eigen::MatrixXcd W = r.W + 0.05 * random_matrix(rng, 3, 2);
    if (W.squaredNorm() > budget) W *= std::sqrt(budget / W.squaredNorm());
    EXPECT_LE(transmit_objective(p, W), best + 1e-10 * std::abs(best));
  }
}

TEST(Transmit, ActiveBudgetIsMetWithComplementarySlackness) {
  Rng rng(33);
  for (int i = 0; i < 50; ++i) {
    const auto p = random_transmit(rng, 4, 3, 4);
    const double budget = verify::detail::log_uniform(rng, 1e-3, 1e3);
    const auto r = solve_transmit_problem(p, budget);
    const double used = r.W.squaredNorm();
    EXPECT_LE(used, budget * (1.0 + 1e-12));
    if (r.diag.mu > 0.0) {
      EXPECT_NEAR(used, budget, 1e-10 * budget);
      EXPECT_TRUE(r.diag.bracket_decreasing);
    }
  }
}

TEST(Transmit, SingularQuadraticTermStillRespectsBudget) {
  Rng rng(34);
  const auto p = random_transmit(rng, 4, 3, 1);
  const auto r = solve_transmit_problem(p, 2.0);
  EXPECT_TRUE(r.diag.singular);
  EXPECT_NEAR(r.W.squaredNorm(), 2.0, 1e-10);
  const auto ref = oracle::projected_gradient_qp(p.Ht, p.Hbar, 2.0);
  EXPECT_GE(transmit_objective(p, r.W), transmit_objective(p, ref) - 1e-8);
}

TEST(Transmit, ZeroLinearTermGivesZeroBeamformer) {
  const TransmitProblem p{Eigen::MatrixXcd::Identity(2, 2), Eigen::MatrixXcd::Zero(2, 2)};
  EXPECT_EQ(solve_transmit_problem(p, 1.0).W.norm(), 0.0);
  EXPECT_THROW(solve_transmit_problem(p, 0.0), DomainError);
}

TEST(Receive, ScalarClosedForm) {
  ReceiveProblem p{scalar(2.0), scalar(cd(1.0, 1.0)), Eigen::VectorXcd::Constant(1, cd(0.5, 0.0))};
  const auto W = solve_receive_problem(p, scalar(1.0));
  // H_r^{-1} hbar / conj(y) = (1 + j) / 2 / 0.5
  EXPECT_NEAR(std::abs(W(0, 0) - cd(1.0, 1.0)), 0.0, 1e-15);
  EXPECT_NEAR(receive_objective(p, W), receive_optimal_value(p), 1e-14);
}

TEST(Receive, GradientVanishesAtClosedForm) {
  Rng rng(41);
  const auto p = random_receive(rng, 3, 2);
  const auto W = solve_receive_problem(p, Eigen::MatrixXcd::Zero(3, 2));
  auto f = [&](const Eigen::MatrixXcd& X) { return oracle::receive_objective_direct(p.Hr, p.Hbar, p.y, X); };
  EXPECT_LT(oracle::fd_gradient_norm(f, W, 1e-6), 1e-6 * (1.0 + std::abs(f(W))));
}

TEST(Receive, CompletingTheSquareIdentity) {
  Rng rng(42);
  const auto p = random_receive(rng, 4, 3);
  const auto W = solve_receive_problem(p, Eigen::MatrixXcd::Zero(4, 3));
  const double v = receive_objective(p, W);
  EXPECT_NEAR(v, receive_optimal_value(p), 1e-10 * std::abs(v));
  for (int i = 0; i < 50; ++i) {
    const Eigen::MatrixXcd D = random_matrix(rng, 4, 3, 0.1);
    double penalty = 0.0;
    for (int u = 0; u < 3; ++u) penalty += std::norm(p.y(u)) * D.col(u).dot(p.Hr * D.col(u)).real();
    EXPECT_NEAR(v - receive_objective(p, W + D), penalty, 1e-10 * (1.0 + std::abs(v)));
  }
}

TEST(Receive, ZeroAuxiliaryKeepsPreviousColumn) {
  Rng rng(43);
  auto p = random_receive(rng, 3, 2);
  p.y(1) = 0.0;
  const Eigen::MatrixXcd prev = random_matrix(rng, 3, 2);
  const auto W = solve_receive_problem(p, prev);
  EXPECT_EQ(W.col(1), prev.col(1));
  EXPECT_NE(W.col(0), prev.col(0));
}

TEST(Receive, NormalizationExamples) {
  Eigen::MatrixXcd W(2, 1);
  W << 3.0, cd(0.0, 4.0);
  const auto N = normalize_receive_columns(W);
  EXPECT_NEAR(std::abs(N(0, 0) - 0.6), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(N(1, 0) - cd(0.0, 0.8)), 0.0, 1e-15);
  EXPECT_TRUE(normalize_receive_columns(N).isApprox(N, 1e-15));
  EXPECT_THROW(normalize_receive_columns(Eigen::MatrixXcd::Zero(2, 2)), DomainError);
}

TEST(Receive, NormalizationPreservesUplinkRates) {
  Rng rng(44);
  ScenarioConfig c;
  c.K_D = 2;
  c.K_U = 2;
  c.N_t = c.N_r = 3;
  const Channels ch{random_matrix(rng, 3, 2, 1e-10), random_matrix(rng, 3, 2, 1e-10), random_matrix(rng, 3, 3, 1e-9),
                    random_matrix(rng, 2, 2, 1e-9)};
  auto st = verify::detail::random_state(c, ch, rng);
  st.W_r *= 37.0;
  const auto before = uplink_rates(st, ch, c);
  st.W_r = normalize_receive_columns(st.W_r);
  EXPECT_TRUE(uplink_rates(st, ch, c).isApprox(before, 1e-12));
}

TEST(UplinkPower, ClosedFormExamples) {
  EXPECT_DOUBLE_EQ(optimal_uplink_power(2.0, 1.0, 10.0), 1.0);
  EXPECT_EQ(optimal_uplink_power(-1.0, 1.0, 10.0), 0.0);
  EXPECT_EQ(optimal_uplink_power(0.0, 1.0, 10.0), 0.0);
  EXPECT_DOUBLE_EQ(optimal_uplink_power(10.0, 1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(optimal_uplink_power(1.0, 0.0, 3.0), 3.0);
}

TEST(UplinkPower, AgreesWithGridSearch) {
  Rng rng(45);
  for (int i = 0; i < 200; ++i) {
    const double c1 = rng.uniform(-1.0, 5.0), c2 = verify::detail::log_uniform(rng, 1e-2, 1e2), pmax = rng.uniform(0.1, 10.0);
    const double p = optimal_uplink_power(c1, c2, pmax);
    const double g = oracle::grid_power(c1, c2, pmax);
    auto f = [&](double x) { return c1 * std::sqrt(x) - c2 * x; };
    EXPECT_GE(f(p), f(g) - 1e-12);
    EXPECT_GE(p, 0.0);
    EXPECT_LE(p, pmax);
  }
}
