#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "prafd/ao_solver.hpp"
#include "prafd/placement.hpp"
#include "suites.hpp"

using namespace prafd;

namespace {

struct Instance {
  ScenarioConfig cfg;
  ChannelRealization real;
  AntennaLayout layout;
  SolverState st;
};

Instance make_instance(std::uint64_t seed, int nt = 3, int nr = 3) {
  Instance in;
  in.cfg.K_D = 2;
  in.cfg.K_U = 2;
  in.cfg.N_t = nt;
  in.cfg.N_r = nr;
  in.cfg.seed = seed;
  in.real = sample_realization(in.cfg, 0);
  in.layout = initialize_layout(in.cfg, 0);
  Rng rng(seed, 0, Stream::kTest);
  const auto ch = build_channels(in.layout, in.real);
  in.st = verify::detail::random_state(in.cfg, ch, rng);
  return in;
}

}  // namespace

TEST(Placement, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto in = make_instance(seed);
    for (Side side : {Side::kTransmit, Side::kReceive}) {
      const auto ctx = make_surrogate_context(side, in.st, in.real, in.cfg, in.layout);
      Points pos = side == Side::kTransmit ? in.layout.t : in.layout.r;
      pos[0] += 0.1 * in.cfg.lambda() * Vec2(0.3, -0.7);
      auto f = [&](const Vec2& x) {
        Points p = pos;
        p[0] = x;
        return placement_objective(ctx, p);
      };
      const Vec2 g = placement_gradient(ctx, pos, 0);
      const Vec2 gfd = oracle::fd_gradient_2d(f, pos[0], 1e-6 * in.cfg.lambda());
      EXPECT_LT((g - gfd).norm(), 1e-4 * gfd.norm()) << "seed " << seed;
      const Eigen::Matrix2d H = placement_hessian(ctx, pos, 0);
      const Eigen::Matrix2d Hfd = oracle::fd_hessian_2d(f, pos[0], 1e-3 * in.cfg.lambda());
      EXPECT_LT((H - Hfd).norm(), 1e-4 * Hfd.norm()) << "seed " << seed;
    }
  }
}

TEST(Placement, CurvatureBoundDominatesHessian) {
  const auto in = make_instance(3);
  const auto ctx = make_surrogate_context(Side::kTransmit, in.st, in.real, in.cfg, in.layout);
  for (std::size_t n = 0; n < in.layout.t.size(); ++n) {
    const double tau = curvature_bound(ctx, in.layout.t, n);
    const Eigen::Matrix2d H = placement_hessian(ctx, in.layout.t, n);
    const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues()(1);
    EXPECT_GE(tau, lmax * (1.0 - 1e-12));
    EXPECT_GT(tau, 0.0);
  }
}

TEST(Placement, SurrogateStationaryPointFormula) {
  const Vec2 sp = surrogate_stationary_point(Vec2(1.0, 2.0), Vec2(4.0, -2.0), 2.0);
  EXPECT_EQ(sp, Vec2(-1.0, 3.0));
  EXPECT_THROW(surrogate_stationary_point(Vec2(0, 0), Vec2(1, 1), 0.0), DomainError);
  EXPECT_THROW(surrogate_stationary_point(Vec2(0, 0), Vec2(1, 1), -1.0), DomainError);
}

TEST(Placement, SurrogateTouchesAtExpansionPoint) {
  const Vec2 x0(0.5, -0.5), g(1.0, 2.0);
  EXPECT_EQ(surrogate_value(3.0, x0, g, 4.0, x0), 3.0);
  EXPECT_DOUBLE_EQ(surrogate_value(3.0, x0, g, 4.0, x0 + Vec2(1.0, 0.0)), 3.0 + 1.0 + 2.0);
}

TEST(Bsum, TraceIsMonotoneAndLayoutFeasible) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto in = make_instance(seed, 4, 4);
    for (Side side : {Side::kTransmit, Side::kReceive}) {
      const auto ctx = make_surrogate_context(side, in.st, in.real, in.cfg, in.layout);
      Rng rng(seed, 0, Stream::kBsumOrder);
      const auto& start = side == Side::kTransmit ? in.layout.t : in.layout.r;
      const auto res = bsum_optimize_side(ctx, start, BsumOptions{}, rng);
      for (std::size_t i = 1; i < res.trace.size(); ++i)
        EXPECT_LE(res.trace[i], res.trace[i - 1] + 1e-12 * std::abs(res.trace[i - 1]));
      EXPECT_TRUE(side_feasible(res.positions, in.cfg.half_width(), in.cfg.min_distance()));
      EXPECT_EQ(res.geometry_failures, 0);
    }
  }
}

TEST(Bsum, RejectsInfeasibleStart) {
  const auto in = make_instance(2);
  const auto ctx = make_surrogate_context(Side::kTransmit, in.st, in.real, in.cfg, in.layout);
  Points bad = in.layout.t;
  bad[1] = bad[0];
  Rng rng(1);
  EXPECT_THROW(bsum_optimize_side(ctx, bad, BsumOptions{}, rng), DomainError);
}

TEST(Bsum, SingleAntennaReachesNearGridOptimum) {
  // Started from the argmin of a fine grid, BSUM must not leave that basin.
  auto in = make_instance(5, 1, 1);
  const auto ctx = make_surrogate_context(Side::kTransmit, in.st, in.real, in.cfg, in.layout);
  const double hw = in.cfg.half_width();
  const int n = 200;
  Vec2 best_x = in.layout.t[0];
  double best = placement_objective(ctx, in.layout.t);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const Points p{Vec2(-hw + 2.0 * hw * i / n, -hw + 2.0 * hw * j / n)};
      const double v = placement_objective(ctx, p);
      if (v < best) {
        best = v;
        best_x = p[0];
      }
    }
  Rng rng(9);
  BsumOptions opts;
  opts.epsilon = 1e-12;
  opts.max_sweeps = 500;
  const auto res = bsum_optimize_side(ctx, Points{best_x}, opts, rng);
  EXPECT_LE(res.trace.back(), best + 1e-12 * std::abs(best));
  const double fine = placement_objective(ctx, res.positions);
  EXPECT_NEAR(fine, best, 1e-3 * std::abs(best));
}
