#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "prafd/beamformer.hpp"
#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/error.hpp"
#include "prafd/fp_objective.hpp"
#include "prafd/placement.hpp"
#include "prafd/rng.hpp"

namespace prafd {

// Moves one side's antennas with everything else fixed; must never increase
// the context's placement objective.
using PositionUpdater = std::function<BsumResult(const SurrogateContext&, const Points&, Rng&)>;

inline PositionUpdater bsum_updater(const BsumOptions& opts) {
  return [opts](const SurrogateContext& c, const Points& start, Rng& rng) {
    return bsum_optimize_side(c, start, opts, rng);
  };
}

struct AoOptions {
  int max_outer = 100;
  bool optimize_positions = true;
  BsumOptions bsum;
  PositionUpdater position_updater;  // empty: BSUM with `bsum`
  BisectionOptions bisection;
  double monotone_tolerance = 1e-9;
  bool y_before_gamma = false;
  std::uint64_t trial = 0;  // selects the per-trial RNG streams
};

struct TrialResult {
  std::string algorithm;
  double sweep_value = 0.0;
  std::uint64_t trial = 0;
  bool ok = true;
  std::string diagnostic;

  double weighted_sum_rate = 0.0;
  Eigen::VectorXd dl_rates;
  Eigen::VectorXd ul_rates;
  int outer_iterations = 0;
  int bsum_sweeps = 0;
  double wall_time_s = 0.0;
  AntennaLayout layout;
  SolverState state;

  std::vector<double> trace;            // weighted sum-rate on the solver's channel, index 0 = start
  std::vector<double> evaluated_trace;  // same states scored on the evaluation channel
  std::vector<double> sandwich_gap;     // |surrogate - WSR| / |WSR| after each gamma/y pass
  int monotone_violations = 0;
  int block_violations = 0;             // surrogate decreased by a block update
  int geometry_fallbacks = 0;
  int geometry_failures = 0;
};

inline AntennaLayout initialize_layout(const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.packing_impossible(cfg.N_t) || cfg.packing_impossible(cfg.N_r))
    throw ConfigError("region cannot hold the requested antennas at D_min spacing");
  const double hw = cfg.half_width();
  const double dmin = cfg.min_distance();
  long failures = 0;
  auto side = [&](int n) {
    Points pts;
    while (static_cast<int>(pts.size()) < n) {
      const Vec2 p(hw * rng.uniform(-1.0, 1.0), hw * rng.uniform(-1.0, 1.0));
      bool ok = true;
      for (const auto& q : pts)
        if ((p - q).norm() < dmin) {
          ok = false;
          break;
        }
      if (ok) {
        pts.push_back(p);
      } else if (++failures >= 100000) {
        throw ConfigError("could not place antennas after 1e5 rejections; region too crowded");
      }
    }
    return pts;
  };
  AntennaLayout l;
  l.t = side(cfg.N_t);
  l.r = side(cfg.N_r);
  return l;
}

inline AntennaLayout initialize_layout(const ScenarioConfig& cfg, std::uint64_t trial) {
  Rng rng(cfg.seed, trial, Stream::kLayout);
  return initialize_layout(cfg, rng);
}

// Maximum-ratio transmit beams at full power and matched receive filters.
inline SolverState initial_state(const Channels& ch, const ScenarioConfig& cfg) {
  SolverState st;
  const double fro2 = ch.dl.squaredNorm();
  st.W_t = fro2 > 0.0 ? Eigen::MatrixXcd(ch.dl * std::sqrt(cfg.p_D_max / fro2)) : Eigen::MatrixXcd::Zero(ch.dl.rows(), ch.dl.cols());
  st.W_r = ch.ul;
  for (Eigen::Index u = 0; u < st.W_r.cols(); ++u) {
    const double n = st.W_r.col(u).norm();
    if (n > 0.0) st.W_r.col(u) /= n;
    else st.W_r.col(u) = Eigen::VectorXcd::Unit(st.W_r.rows(), 0);
  }
  st.p_u = Eigen::VectorXd::Constant(ch.ul.cols(), cfg.p_U_max);
  st.gamma = Eigen::VectorXd::Zero(ch.dl.cols() + ch.ul.cols());
  st.y = Eigen::VectorXcd::Zero(ch.dl.cols() + ch.ul.cols());
  return st;
}

// FP-based alternating optimisation. The solver sees `realization`; every
// iterate is also scored on `evaluation` when given (mismatched CSI).
inline TrialResult alternating_optimize(const ScenarioConfig& cfg, const ChannelRealization& realization,
                                        const AntennaLayout& initial, const AoOptions& opts = {},
                                        const ChannelRealization* evaluation = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!layout_feasible(initial, cfg)) throw DomainError("initial antenna layout is infeasible");
  if (static_cast<int>(initial.t.size()) != cfg.N_t || static_cast<int>(initial.r.size()) != cfg.N_r)
    throw DomainError("initial layout does not match the antenna counts");

  TrialResult res;
  res.trial = opts.trial;
  AntennaLayout layout = initial;
  Channels ch = build_channels(layout, realization);
  SolverState st = initial_state(ch, cfg);
  const PositionUpdater move = opts.position_updater ? opts.position_updater : bsum_updater(opts.bsum);
  Rng order_rng(cfg.seed, opts.trial, Stream::kBsumOrder);

  auto evaluate = [&](const SolverState& s) {
    if (!evaluation) return weighted_sum_rate(s, ch, cfg);
    return weighted_sum_rate(s, build_channels(layout, *evaluation), cfg);
  };
  auto surrogate = [&] { return quadratic_transform_objective(st, ch, cfg); };
  auto check_block = [&](double before, double after) {
    if (after < before - opts.monotone_tolerance * std::max(1.0, std::abs(before))) ++res.block_violations;
  };

  double wsr = weighted_sum_rate(st, ch, cfg);
  res.trace.push_back(wsr);
  res.evaluated_trace.push_back(evaluate(st));

  try {
    for (int it = 0; it < opts.max_outer; ++it) {
      if (opts.y_before_gamma) {
        st.y = update_y(st, ch, cfg);
        st.gamma = update_gamma(st, ch, cfg);
      } else {
        st.gamma = update_gamma(st, ch, cfg);
        st.y = update_y(st, ch, cfg);
      }
      double qt = surrogate();
      res.sandwich_gap.push_back(std::abs(qt - wsr) / (wsr != 0.0 ? std::abs(wsr) : 1.0));

      const auto tx = update_transmit_beamformer(st, ch, cfg, opts.bisection);
      st.W_t = tx.W;
      double next = surrogate();
      check_block(qt, next);
      qt = next;

      st.W_r = update_receive_beamformer(st, ch, cfg);
      next = surrogate();
      check_block(qt, next);
      qt = next;

      st.p_u = update_uplink_power(st, ch, cfg);
      next = surrogate();
      check_block(qt, next);
      qt = next;

      if (opts.optimize_positions) {
        for (Side side : {Side::kTransmit, Side::kReceive}) {
          const bool has_users = side == Side::kTransmit ? cfg.K_D > 0 : cfg.K_U > 0;
          if (!has_users) continue;
          const auto ctx = make_surrogate_context(side, st, realization, cfg, layout);
          Points& pts = side == Side::kTransmit ? layout.t : layout.r;
          auto moved = move(ctx, pts, order_rng);
          pts = std::move(moved.positions);
          res.bsum_sweeps += moved.sweeps;
          res.geometry_fallbacks += moved.geometry_fallbacks;
          res.geometry_failures += moved.geometry_failures;
          ch = build_channels(layout, realization);
          next = surrogate();
          check_block(qt, next);
          qt = next;
        }
      }

      const double wsr_new = weighted_sum_rate(st, ch, cfg);
      if (wsr_new < wsr - opts.monotone_tolerance * std::max(1.0, std::abs(wsr))) ++res.monotone_violations;
      res.trace.push_back(wsr_new);
      res.evaluated_trace.push_back(evaluate(st));
      res.outer_iterations = it + 1;
      const double change = std::abs(wsr_new - wsr);
      wsr = wsr_new;
      if (change <= cfg.epsilon * std::max(std::abs(res.trace[res.trace.size() - 2]), 1e-9)) break;
    }
    st.W_r = normalize_receive_columns(st.W_r);
  } catch (const InternalError& e) {
    res.ok = false;
    res.diagnostic = e.what();
  }

  const Channels& eval_ch = evaluation ? build_channels(layout, *evaluation) : ch;
  if (res.ok) {
    res.dl_rates = downlink_rates(st, eval_ch, cfg);
    res.ul_rates = uplink_rates(st, eval_ch, cfg);
    res.weighted_sum_rate = weighted_sum_rate(st, eval_ch, cfg);
  }
  res.layout = std::move(layout);
  res.state = std::move(st);
  res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace prafd
