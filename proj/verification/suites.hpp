#pragma once

// Acceptance suites. Each returns a pass/fail verdict plus a one-line
// summary of what was measured; the acceptance test and `prafd oracle`
// both run them.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "prafd/prafd.hpp"

namespace prafd::verify {

struct Verdict {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
};

struct Suite {
  int id;
  std::string name;
  std::function<Verdict()> run;
};

namespace detail {

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline Eigen::MatrixXcd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double var = 1.0) {
  Eigen::MatrixXcd M(r, c);
  for (Eigen::Index i = 0; i < M.size(); ++i) M(i) = rng.cscg(var);
  return M;
}

inline double log_uniform(Rng& rng, double lo, double hi) {
  return std::exp(rng.uniform(std::log(lo), std::log(hi)));
}

inline int rand_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.index(static_cast<std::size_t>(hi - lo + 1))); }

// Small scenario with random dimensions and a feasible random layout.
inline ScenarioConfig small_config(Rng& rng) {
  ScenarioConfig cfg;
  cfg.K_D = rand_int(rng, 1, 3);
  cfg.K_U = rand_int(rng, 1, 3);
  cfg.N_t = rand_int(rng, 1, 4);
  cfg.N_r = rand_int(rng, 1, 4);
  cfg.L = rand_int(rng, 1, 6);
  cfg.L_SI = rand_int(rng, 1, 4);
  cfg.seed = rng.bits();
  return cfg;
}

// A state that is not tied to any optimum: random beams at random power,
// random receive filters, random powers and the matching FP auxiliaries.
inline SolverState random_state(const ScenarioConfig& cfg, const Channels& ch, Rng& rng) {
  SolverState st;
  st.W_t = random_matrix(rng, cfg.N_t, cfg.K_D);
  st.W_t *= std::sqrt(cfg.p_D_max * rng.uniform(0.1, 1.0)) / st.W_t.norm();
  st.W_r = random_matrix(rng, cfg.N_r, cfg.K_U);
  st.p_u = Eigen::VectorXd(cfg.K_U);
  for (int u = 0; u < cfg.K_U; ++u) st.p_u(u) = cfg.p_U_max * rng.uniform(0.0, 1.0);
  st.gamma = update_gamma(st, ch, cfg);
  st.y = update_y(st, ch, cfg);
  return st;
}

}  // namespace detail

// ---- solver-level suites over seeded trials ----

inline std::vector<Verdict> monotone_and_sandwich(int trials = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioConfig cfg;
  cfg.K_D = cfg.K_U = 2;
  cfg.N_t = cfg.N_r = 2;
  int violations = 0, block_violations = 0, passes = 0, failed = 0, gap_violations = 0;
  double worst_drop = 0.0, worst_gap = 0.0;
  for (int t = 0; t < trials; ++t) {
    const auto r = run_trial(cfg, "fp-bsum", static_cast<std::uint64_t>(t), 0.0, 0.0, 0.5, false, 100);
    if (!r.ok) ++failed;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      const double drop = r.trace[i - 1] - r.trace[i];
      worst_drop = std::max(worst_drop, drop);
      if (drop > 1e-9) ++violations;
    }
    for (double g : r.sandwich_gap) {
      worst_gap = std::max(worst_gap, g);
      if (!(g <= 1e-9)) ++gap_violations;
    }
    passes += static_cast<int>(r.sandwich_gap.size());
    block_violations += r.block_violations;
  }
  const double secs = detail::seconds_since(t0);
  Verdict mono{1, "monotone AO", violations == 0 && failed == 0 && secs < 300.0,
               std::to_string(trials) + " trials at K=N=2, " + std::to_string(violations) +
                   " decreases beyond 1e-9 (largest drop " + detail::fmt(worst_drop) + "), " +
                   std::to_string(block_violations) + " block-level decreases, " + std::to_string(failed) +
                   " failed trials, " + detail::fmt(secs, 3) + " s"};
  Verdict sand{2, "FP sandwich", gap_violations == 0 && passes > 0 && failed == 0,
               std::to_string(passes) + " gamma/y passes, max relative gap " + detail::fmt(worst_gap) + ", " +
                   std::to_string(gap_violations) + " above 1e-9"};
  return {mono, sand};
}

// ---- block oracles ----

inline Verdict transmit_optimality(int instances = 500) {
  Rng rng(20240101, 3, Stream::kTest);
  int worse = 0, slack_bad = 0, infeasible = 0, binding = 0;
  double worst_rel = -1e300, worst_slack = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int N = detail::rand_int(rng, 1, 4), K = detail::rand_int(rng, 1, 4), M = detail::rand_int(rng, 0, 4);
    const Eigen::MatrixXcd Hd = detail::random_matrix(rng, N, K);
    Eigen::VectorXcd y(K);
    Eigen::VectorXd a(K);
    for (int k = 0; k < K; ++k) {
      y(k) = rng.cscg(1.0);
      a(k) = rng.uniform(0.2, 2.0);
    }
    const Eigen::MatrixXcd E = detail::random_matrix(rng, N, M, 0.5);
    Eigen::MatrixXcd Ht = Hd * y.cwiseAbs2().asDiagonal() * Hd.adjoint() + E * E.adjoint();
    Eigen::MatrixXcd Hbar = Hd * y.asDiagonal() * a.asDiagonal();
    // A quarter of the instances get a target outside range(Ht).
    if (rng.uniform() < 0.25) Hbar += detail::random_matrix(rng, N, K, 0.1);
    const double scale = detail::log_uniform(rng, 1e-3, 1e3);
    Ht *= scale;
    const double p = detail::log_uniform(rng, 1e-2, 1e2);

    const auto upd = solve_transmit_problem({Ht, Hbar}, p);
    const double kkt = oracle::transmit_objective_direct(Ht, Hbar, upd.W);
    const Eigen::MatrixXcd Wo = oracle::projected_gradient_qp(Ht, Hbar, p);
    const double ref = oracle::transmit_objective_direct(Ht, Hbar, Wo);
    const double rel = (ref - kkt) / std::max(std::abs(ref), 1e-300);
    worst_rel = std::max(worst_rel, rel);
    if (kkt < ref - 1e-4 * std::abs(ref)) ++worse;
    const double power = upd.W.squaredNorm();
    if (power > p * (1.0 + 1e-6)) ++infeasible;
    if (upd.diag.mu > 0.0) {
      ++binding;
      const double s = std::abs(power - p) / p;
      worst_slack = std::max(worst_slack, s);
      if (!(s < 1e-6)) ++slack_bad;
    }
  }
  return {3, "W_t optimality", worse == 0 && slack_bad == 0 && infeasible == 0 && binding > 0 && binding < instances,
          std::to_string(instances) + " instances (" + std::to_string(binding) + " with mu>0), " +
              std::to_string(worse) + " below oracle (worst oracle excess " + detail::fmt(worst_rel) + " rel), " +
              "max |Tr-p|/p " + detail::fmt(worst_slack) + ", " + std::to_string(infeasible) + " over budget"};
}

inline Verdict receive_closed_form(int instances = 500) {
  Rng rng(20240101, 4, Stream::kTest);
  int bad_value = 0, bad_grad = 0;
  double worst_value = 0.0, worst_grad = 0.0;
  for (int i = 0; i < instances; ++i) {
    const int N = detail::rand_int(rng, 1, 4), K = detail::rand_int(rng, 1, 4), M = detail::rand_int(rng, 0, 4);
    const Eigen::MatrixXcd E = detail::random_matrix(rng, N, M);
    const Eigen::MatrixXcd Hr =
        E * E.adjoint() + rng.uniform(0.1, 1.0) * Eigen::MatrixXcd::Identity(N, N);
    const Eigen::MatrixXcd Hbar = detail::random_matrix(rng, N, K);
    Eigen::VectorXcd y(K);
    for (int k = 0; k < K; ++k) y(k) = rng.cscg(1.0) + 0.1;
    const ReceiveProblem prob{Hr, Hbar, y};
    const Eigen::MatrixXcd W = solve_receive_problem(prob, detail::random_matrix(rng, N, K));

    const double value = oracle::receive_objective_direct(Hr, Hbar, y, W);
    const double closed = std::real((Hbar.adjoint() * Hr.fullPivLu().inverse() * Hbar).trace());
    const double rel = std::abs(value - closed) / std::abs(closed);
    worst_value = std::max(worst_value, rel);
    if (!(rel <= 1e-9)) ++bad_value;

    const double g = oracle::fd_gradient_norm(
        [&](const Eigen::MatrixXcd& X) { return oracle::receive_objective_direct(Hr, Hbar, y, X); }, W, 1e-5);
    worst_grad = std::max(worst_grad, g);
    if (!(g < 1e-8)) ++bad_grad;
  }
  return {4, "W_r closed form", bad_value == 0 && bad_grad == 0,
          std::to_string(instances) + " instances, max value error " + detail::fmt(worst_value) +
              " rel, max FD gradient norm " + detail::fmt(worst_grad)};
}

inline Verdict power_oracle(int draws = 1000) {
  Rng rng(20240101, 5, Stream::kTest);
  int mismatches = 0, nonpositive = 0, capped = 0, interior = 0;
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double p_max = detail::log_uniform(rng, 1e-3, 1.0);
    double c1, c2;
    const double u = rng.uniform();
    if (u < 0.15) {
      c1 = -detail::log_uniform(rng, 1e-3, 10.0);
      c2 = detail::log_uniform(rng, 1e-3, 10.0);
    } else if (u < 0.2) {
      c1 = 0.0;
      c2 = rng.uniform() < 0.5 ? 0.0 : detail::log_uniform(rng, 1e-3, 10.0);
    } else if (u < 0.25) {
      c1 = detail::log_uniform(rng, 1e-3, 10.0);
      c2 = 0.0;
    } else {
      c1 = detail::log_uniform(rng, 1e-3, 10.0);
      c2 = detail::log_uniform(rng, 1e-3, 10.0);
    }
    const double p = optimal_uplink_power(c1, c2, p_max);
    const double grid = oracle::grid_power(c1, c2, p_max);
    const double step = p_max / (10000 - 1);
    const double err = std::abs(p - grid) / step;
    worst = std::max(worst, err);
    if (!(err <= 1.0)) ++mismatches;
    if (c1 <= 0.0) ++nonpositive;
    else if (c2 == 0.0 || c1 * c1 / (4.0 * c2 * c2) >= p_max) ++capped;
    else ++interior;
  }
  return {5, "power allocation oracle", mismatches == 0 && nonpositive > 0 && capped > 0 && interior > 0,
          std::to_string(draws) + " draws (" + std::to_string(nonpositive) + " c1<=0, " + std::to_string(capped) +
              " cap-binding, " + std::to_string(interior) + " interior), worst error " + detail::fmt(worst) +
              " grid steps"};
}

inline Verdict placement_derivatives(int instances = 1000) {
  Rng rng(20240101, 6, Stream::kTest);
  int bad_grad = 0, bad_psd = 0;
  double worst_grad = 0.0, worst_psd = 0.0;
  for (int i = 0; i < instances; ++i) {
    const ScenarioConfig cfg = detail::small_config(rng);
    const auto real = sample_realization(cfg, static_cast<std::uint64_t>(i));
    const auto layout = initialize_layout(cfg, rng);
    const Channels ch = build_channels(layout, real);
    SolverState st = detail::random_state(cfg, ch, rng);
    if (i % 2 == 0) {
      st.W_t = update_transmit_beamformer(st, ch, cfg).W;
      st.W_r = update_receive_beamformer(st, ch, cfg);
    }
    const Side side = i % 4 < 2 ? Side::kTransmit : Side::kReceive;
    const auto ctx = make_surrogate_context(side, st, real, cfg, layout);
    Points pos = side == Side::kTransmit ? layout.t : layout.r;
    const std::size_t n = rng.index(pos.size());
    // Move the antenna off the point the auxiliaries were fitted to; there
    // the gradient can vanish identically and FD only measures rounding.
    const FeasibleRegionSpec others = region_without(ctx, pos, n);
    for (int tries = 0; tries < 100; ++tries) {
      const Vec2 cand = pos[n] + cfg.lambda() * Vec2(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
      if (others.feasible(cand)) {
        pos[n] = cand;
        break;
      }
    }

    auto f = [&](const Vec2& x) {
      Points p = pos;
      p[n] = x;
      return placement_objective(ctx, p);
    };
    const Vec2 ga = placement_gradient(ctx, pos, n);
    const Vec2 gfd = oracle::fd_gradient_2d(f, pos[n], 1e-6 * cfg.lambda());
    const double rel = (ga - gfd).norm() / gfd.norm();
    worst_grad = std::max(worst_grad, rel);
    if (!(rel < 1e-4)) ++bad_grad;

    const double tau = curvature_bound(ctx, pos, n);
    const Eigen::Matrix2d Hfd = oracle::fd_hessian_2d(f, pos[n], 1e-3 * cfg.lambda());
    const Eigen::Matrix2d M = tau * Eigen::Matrix2d::Identity() - Hfd;
    const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(M, Eigen::EigenvaluesOnly).eigenvalues()(0);
    const double scale = std::max(Hfd.operatorNorm(), tau);
    const double deficit = -lmin / scale;
    worst_psd = std::max(worst_psd, deficit);
    if (deficit > 1e-6) ++bad_psd;
  }
  return {6, "gradient/Hessian correctness", bad_grad == 0 && bad_psd == 0,
          std::to_string(instances) + " instances, max gradient error " + detail::fmt(worst_grad) +
              " rel, worst PSD deficit " + detail::fmt(worst_psd) + " rel"};
}

inline Verdict geometry_oracle(int configs = 1000) {
  Rng rng(20240101, 7, Stream::kTest);
  const double lambda = 0.01;
  const double hw = 2.0 * lambda;
  const double dmin = 0.5 * lambda;
  const double step = lambda / 200.0;
  const double diag = step * std::sqrt(2.0);
  int infeasible = 0, suboptimal = 0, failures = 0, simp_infeasible = 0;
  double worst_excess = -1e300, extra_sum = 0.0, extra_max = 0.0;
  auto truly_feasible = [&](const Vec2& p, const FeasibleRegionSpec& s) {
    const double tol = 1e-9 * dmin;
    if (std::abs(p.x()) > hw + tol || std::abs(p.y()) > hw + tol) return false;
    for (const auto& o : s.obstacles)
      if ((p - o).norm() < dmin - tol) return false;
    return true;
  };
  for (int i = 0; i < configs; ++i) {
    FeasibleRegionSpec spec{hw, {}, dmin};
    const int n_obs = detail::rand_int(rng, 0, 6);
    while (static_cast<int>(spec.obstacles.size()) < n_obs) {
      const Vec2 c(rng.uniform(-hw, hw), rng.uniform(-hw, hw));
      bool ok = true;
      for (const auto& o : spec.obstacles) ok = ok && (c - o).norm() >= dmin;
      if (ok) spec.obstacles.push_back(c);
    }
    Vec2 sp(rng.uniform(-1.5 * hw, 1.5 * hw), rng.uniform(-1.5 * hw, 1.5 * hw));
    // Every fifth SP sits on an obstacle centre, the degenerate SCI case.
    if (n_obs > 0 && i % 5 == 0) sp = spec.obstacles[rng.index(spec.obstacles.size())];

    const auto exact = nearest_feasible_point(sp, spec, false, rng.bits());
    const auto simp = nearest_feasible_point(sp, spec, true, rng.bits());
    if (!exact.ok || !simp.ok) ++failures;
    if (!truly_feasible(exact.point, spec)) ++infeasible;
    if (!truly_feasible(simp.point, spec)) ++simp_infeasible;
    const double d_exact = (exact.point - sp).norm();
    const double d_grid = oracle::grid_nearest_distance(sp, spec, step);
    worst_excess = std::max(worst_excess, (d_exact - d_grid) / diag);
    if (d_exact > d_grid + diag) ++suboptimal;
    const double extra = std::max(0.0, (simp.point - sp).norm() - d_exact);
    extra_sum += extra;
    extra_max = std::max(extra_max, extra);
  }
  const double mean_extra = extra_sum / configs / dmin;
  return {7, "geometry oracle",
          infeasible == 0 && suboptimal == 0 && failures == 0 && simp_infeasible == 0 && mean_extra <= 0.05,
          std::to_string(configs) + " configs, exact: " + std::to_string(infeasible) + " infeasible, " +
              std::to_string(suboptimal) + " beyond one grid diagonal (worst " + detail::fmt(worst_excess) +
              " diagonals); simplified: " + std::to_string(simp_infeasible) + " infeasible, mean extra distance " +
              detail::fmt(100.0 * mean_extra) + "% of D_min (max " + detail::fmt(100.0 * extra_max / dmin) + "%)"};
}

inline Verdict scaling_invariance(int draws = 1000) {
  Rng rng(20240101, 8, Stream::kTest);
  int bad = 0;
  double worst = 0.0;
  for (int i = 0; i < draws; ++i) {
    const ScenarioConfig cfg = detail::small_config(rng);
    const auto real = sample_realization(cfg, static_cast<std::uint64_t>(i));
    const Channels ch = build_channels(initialize_layout(cfg, rng), real);
    SolverState st = detail::random_state(cfg, ch, rng);
    const double before = weighted_sum_rate(st, ch, cfg);
    st.W_r.col(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(cfg.K_U)))) *=
        detail::log_uniform(rng, 0.1, 10.0);
    const double after = weighted_sum_rate(st, ch, cfg);
    const double rel = std::abs(after - before) / std::abs(before);
    worst = std::max(worst, rel);
    if (!(rel < 1e-9)) ++bad;
  }
  return {8, "receive-filter scaling invariance", bad == 0,
          std::to_string(draws) + " draws, max relative change " + detail::fmt(worst)};
}

// ---- desk-scale experiments ----

namespace detail {

inline ExperimentSpec desk_spec(int trials, std::vector<std::string> algos) {
  ExperimentSpec s;
  s.trials = trials;
  s.algorithms = std::move(algos);
  s.out_dir.clear();
  return s;
}

inline double mean_of(const ExperimentResult& r, const std::string& algo, double sweep_value = 0.0) {
  for (const auto& a : r.aggregates)
    if (a.algorithm == algo && a.sweep_value == sweep_value) return a.mean;
  throw InternalError("missing aggregate for " + algo);
}

inline int failures(const ExperimentResult& r) {
  int n = 0;
  for (const auto& a : r.aggregates) n += a.n_failed;
  return n;
}

}  // namespace detail

inline Verdict paired_comparisons(int trials = 200) {
  const auto t0 = std::chrono::steady_clock::now();
  auto spec = detail::desk_spec(trials, {"fp-bsum", "fpas", "fp-gd"});
  spec.base.K_D = spec.base.K_U = 2;
  spec.base.N_t = spec.base.N_r = 2;
  spec.base.A = 4.0;
  const auto two = run_experiment(spec);

  auto single = detail::desk_spec(trials, {"fp-bsum", "fpas"});
  single.base.K_D = single.base.K_U = 1;
  single.base.N_t = single.base.N_r = 1;
  single.base.A = 4.0;
  const auto one = run_experiment(single);
  const double secs = detail::seconds_since(t0);

  const double bsum = detail::mean_of(two, "fp-bsum"), fpas = detail::mean_of(two, "fpas"),
               gd = detail::mean_of(two, "fp-gd");
  const double bsum1 = detail::mean_of(one, "fp-bsum"), fpas1 = detail::mean_of(one, "fpas");
  const double gain1 = bsum1 / fpas1 - 1.0;
  const int failed = detail::failures(two) + detail::failures(one);
  const bool ok = bsum > fpas && bsum >= gd && gain1 >= 0.10 && failed == 0 && secs < 900.0;
  return {9, "paired comparisons", ok,
          "K=N=2: FP-BSUM " + detail::fmt(bsum) + ", FPAS " + detail::fmt(fpas) + " (gain " +
              detail::fmt(100.0 * (bsum / fpas - 1.0), 3) + "%), FP-GD " + detail::fmt(gd) + "; N=K=1: FP-BSUM " +
              detail::fmt(bsum1) + ", FPAS " + detail::fmt(fpas1) + ", gain " + detail::fmt(100.0 * gain1, 3) +
              "% (floor 10%); " + std::to_string(failed) + " failed, " + detail::fmt(secs, 3) + " s"};
}

inline Verdict region_saturation(int trials = 1000) {
  auto spec = detail::desk_spec(trials, {"fp-bsum"});
  spec.base.K_D = spec.base.K_U = 2;
  spec.base.N_t = spec.base.N_r = 2;
  spec.sweep_field = "A";
  spec.sweep_values = {1, 2, 3, 4, 5};
  const auto r = run_experiment(spec);
  std::vector<double> m;
  for (double a : spec.sweep_values) m.push_back(detail::mean_of(r, "fp-bsum", a));
  bool monotone = true;
  for (std::size_t i = 1; i < m.size(); ++i) monotone = monotone && m[i] >= m[i - 1];
  const double g12 = m[1] - m[0], g45 = m[4] - m[3];
  std::string means;
  for (std::size_t i = 0; i < m.size(); ++i) means += (i ? ", " : "") + detail::fmt(m[i]);
  return {10, "region-size saturation", monotone && g45 < g12 && detail::failures(r) == 0,
          std::to_string(trials) + " trials per A, means [" + means + "], gain 1->2 " + detail::fmt(g12) +
              ", gain 4->5 " + detail::fmt(g45)};
}

inline Verdict convergence_speed(int trials = 100) {
  const auto r = run_experiment(detail::desk_spec(trials, {"fp-bsum"}));
  const double median = r.aggregates.at(0).median_outer_iterations;
  int capped = 0;
  for (const auto& t : r.trials) capped += t.outer_iterations >= 100;
  return {11, "convergence speed", median <= 15.0 && detail::failures(r) == 0,
          std::to_string(trials) + " trials at defaults, median " + detail::fmt(median) + " outer iterations, mean " +
              detail::fmt(r.aggregates.at(0).mean_outer_iterations) + ", " + std::to_string(capped) +
              " hit the iteration cap"};
}

inline Verdict robustness(int trials = 100) {
  auto base = detail::desk_spec(trials, {"fp-bsum"});
  const auto clean = run_experiment(base);
  auto angle = base;
  angle.theta_m = 0.2;
  const auto noisy = run_experiment(angle);
  auto prm = base;
  prm.sigma_e2 = 0.2;
  const auto prm_run = run_experiment(prm);

  const double m0 = detail::mean_of(clean, "fp-bsum"), m1 = detail::mean_of(noisy, "fp-bsum"),
               m2 = detail::mean_of(prm_run, "fp-bsum");
  int rise_fall = 0;
  for (const auto& t : prm_run.trials) {
    const auto& e = t.evaluated_trace;
    for (std::size_t i = 1; i < e.size(); ++i)
      if (e[i] < e[i - 1] - 1e-9 * std::abs(e[i - 1])) {
        ++rise_fall;
        break;
      }
  }
  const int failed = detail::failures(clean) + detail::failures(noisy) + detail::failures(prm_run);
  return {12, "robustness direction", m1 < m0 && rise_fall > 0 && failed == 0,
          "theta_m=0: " + detail::fmt(m0) + ", theta_m=0.2: " + detail::fmt(m1) + " (loss " +
              detail::fmt(100.0 * (1.0 - m1 / m0), 3) + "%); sigma_e2=0.2: " + detail::fmt(m2) + ", " +
              std::to_string(rise_fall) + "/" + std::to_string(trials) + " evaluated traces non-monotone"};
}

// Drops the named columns from every CSV line (quote-aware).
inline std::string strip_columns(const std::string& csv, const std::vector<std::string>& drop) {
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (char c : line) {
      if (c == '"') quoted = !quoted;
      if (c == ',' && !quoted) {
        cells.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    cells.push_back(cur);
    return cells;
  };
  std::istringstream in(csv);
  std::string line, out;
  std::vector<bool> keep;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    if (keep.empty())
      for (const auto& c : cells) keep.push_back(std::find(drop.begin(), drop.end(), c) == drop.end());
    for (std::size_t i = 0; i < cells.size(); ++i)
      if (i >= keep.size() || keep[i]) out += cells[i] + ',';
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

inline Verdict determinism(const std::filesystem::path& scratch) {
  auto spec = detail::desk_spec(8, {"fp-bsum", "fp-bsum-simplified", "fp-gd", "fpas", "hd"});
  spec.base.K_D = spec.base.K_U = 2;
  spec.base.N_t = spec.base.N_r = 3;
  spec.sweep_field = "A";
  spec.sweep_values = {2, 4};
  spec.sigma_e2 = 0.05;
  std::vector<std::string> raw, agg;
  for (unsigned threads : {1u, 4u, 1u}) {
    spec.threads = threads;
    const auto dir = scratch / ("run" + std::to_string(raw.size()));
    const auto paths = emit_csv(run_experiment(spec), dir);
    raw.push_back(strip_columns(read_file(paths.raw), {"wall_time_s"}));
    agg.push_back(strip_columns(read_file(paths.aggregate), {"mean_wall_time_s"}));
  }
  const bool same = raw[0] == raw[1] && raw[1] == raw[2] && agg[0] == agg[1] && agg[1] == agg[2];
  return {13, "determinism", same && !raw[0].empty(),
          "3 runs (1, 4, 1 threads) of a 2-point x 5-algorithm x 8-trial sweep: raw " +
              std::string(raw[0] == raw[1] && raw[1] == raw[2] ? "identical" : "DIFFERENT") + " (" +
              std::to_string(raw[0].size()) + " bytes), aggregate " +
              std::string(agg[0] == agg[1] && agg[1] == agg[2] ? "identical" : "DIFFERENT")};
}

// Suites 3-8 are brute-force oracles; the rest run the full solver.
inline std::vector<Suite> oracle_suites() {
  return {{3, "W_t optimality", [] { return transmit_optimality(); }},
          {4, "W_r closed form", [] { return receive_closed_form(); }},
          {5, "power allocation oracle", [] { return power_oracle(); }},
          {6, "gradient/Hessian correctness", [] { return placement_derivatives(); }},
          {7, "geometry oracle", [] { return geometry_oracle(); }},
          {8, "receive-filter scaling invariance", [] { return scaling_invariance(); }}};
}

}  // namespace prafd::verify
