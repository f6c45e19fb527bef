#pragma once

#include <cmath>
#include <vector>

#include "prafd/ao_solver.hpp"
#include "prafd/geometry.hpp"
#include "prafd/placement.hpp"

namespace prafd {

// Centred ceil(sqrt(N)) x ceil(sqrt(N)) grid filled row by row.
inline Points upa_layout(int n, double spacing, double half_width) {
  if (n < 1) throw ConfigError("UPA needs at least one antenna");
  if (!(spacing > 0.0)) throw ConfigError("UPA spacing must be positive");
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  const double extent = 0.5 * (side - 1) * spacing;
  if (extent > half_width * (1.0 + 1e-12)) throw ConfigError("UPA grid does not fit in the region");
  Points pts;
  for (int i = 0; i < n; ++i) {
    const int row = i / side;
    const int col = i % side;
    pts.emplace_back(-extent + col * spacing, extent - row * spacing);
  }
  return pts;
}

inline AntennaLayout upa_layout(const ScenarioConfig& cfg) {
  const double spacing = 0.5 * cfg.lambda();
  return {upa_layout(cfg.N_t, spacing, cfg.half_width()), upa_layout(cfg.N_r, spacing, cfg.half_width())};
}

// Fixed-position arrays: beamforming and power only.
inline TrialResult solve_fpas(const ScenarioConfig& cfg, const ChannelRealization& realization, AoOptions opts = {},
                              const ChannelRealization* evaluation = nullptr) {
  opts.optimize_positions = false;
  auto r = alternating_optimize(cfg, realization, upa_layout(cfg), opts, evaluation);
  r.algorithm = "fpas";
  return r;
}

namespace detail {

inline ChannelRealization downlink_only(const ChannelRealization& ch) {
  ChannelRealization d = ch;
  d.prm_ul.clear();
  d.geometry.ul.clear();
  d.geometry.ul_distance.clear();
  d.iui.resize(ch.iui.rows(), 0);
  return d;
}

}  // namespace detail

// Time-division half duplex: the DL-only problem scaled by the fraction of
// time spent transmitting. DL weights are kept as in the full-duplex config.
inline TrialResult solve_half_duplex(const ScenarioConfig& cfg, const ChannelRealization& realization,
                                     const AntennaLayout& initial, double duplex_factor = 0.5, AoOptions opts = {},
                                     const ChannelRealization* evaluation = nullptr) {
  if (!(duplex_factor >= 0.0 && duplex_factor <= 1.0)) throw ConfigError("duplex factor must lie in [0, 1]");
  ScenarioConfig hd = cfg;
  const auto w = cfg.resolved_weights();
  hd.weights.assign(w.begin(), w.begin() + cfg.K_D);
  hd.K_U = 0;
  const auto dl = detail::downlink_only(realization);
  const auto dl_eval = evaluation ? detail::downlink_only(*evaluation) : ChannelRealization{};
  auto r = alternating_optimize(hd, dl, initial, opts, evaluation ? &dl_eval : nullptr);
  r.algorithm = "hd";
  r.weighted_sum_rate *= duplex_factor;
  for (auto& v : r.trace) v *= duplex_factor;
  for (auto& v : r.evaluated_trace) v *= duplex_factor;
  return r;
}

struct GradientDescentOptions {
  int max_steps = 200;
  double epsilon = 1e-3;
  double armijo_c = 1e-4;
  int max_halvings = 30;
  bool simplified_geometry = false;
};

// Projected gradient descent on all antennas of one side at once, with
// Armijo backtracking. Antennas are projected in index order, each against
// the ones already projected, so every trial layout is feasible.
inline BsumResult gradient_descent_positions(const SurrogateContext& c, const Points& start,
                                             const GradientDescentOptions& opts, Rng& rng) {
  if (!side_feasible(start, c.half_width, c.d_min)) throw DomainError("gradient descent start layout is infeasible");
  BsumResult res;
  res.positions = start;
  auto& pos = res.positions;
  double f = placement_objective(c, pos);
  res.trace.push_back(f);
  const std::size_t n = pos.size();

  for (int step = 0; step < opts.max_steps; ++step) {
    std::vector<Vec2> g(n);
    double gmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      g[i] = placement_gradient(c, pos, i);
      gmax = std::max(gmax, g[i].norm());
    }
    if (gmax == 0.0) break;

    double alpha = c.lambda() / gmax;
    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings && !accepted; ++h, alpha *= 0.5) {
      Points trial;
      bool ok = true;
      for (std::size_t i = 0; i < n && ok; ++i) {
        FeasibleRegionSpec spec{c.half_width, trial, c.d_min};
        const auto gr = nearest_feasible_point(pos[i] - alpha * g[i], spec, opts.simplified_geometry, rng.bits());
        if (gr.fallback) ++res.geometry_fallbacks;
        if (!gr.ok) {
          ++res.geometry_failures;
          ok = false;
        }
        trial.push_back(gr.point);
      }
      if (!ok) continue;
      double slope = 0.0;
      for (std::size_t i = 0; i < n; ++i) slope += g[i].dot(trial[i] - pos[i]);
      const double f_new = placement_objective(c, trial);
      if (f_new <= f && f_new <= f + opts.armijo_c * slope) {
        pos = std::move(trial);
        accepted = true;
        ++res.sweeps;
        const double change = std::abs(f - f_new);
        const double f_old = f;
        f = f_new;
        res.trace.push_back(f);
        if (change <= opts.epsilon * std::abs(f_old)) return res;
      } else {
        ++res.rejected_steps;
      }
    }
    if (!accepted) break;
  }
  return res;
}

inline PositionUpdater gradient_descent_updater(const GradientDescentOptions& opts) {
  return [opts](const SurrogateContext& c, const Points& start, Rng& rng) {
    return gradient_descent_positions(c, start, opts, rng);
  };
}

}  // namespace prafd
