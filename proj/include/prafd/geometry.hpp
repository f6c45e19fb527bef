#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "prafd/channel.hpp"
#include "prafd/error.hpp"
#include "prafd/rng.hpp"

namespace prafd {

// Square [-half_width, half_width]^2 minus open discs of the given radius
// around each obstacle.
struct FeasibleRegionSpec {
  double half_width = 0.0;
  Points obstacles;
  double radius = 0.0;

  double slack() const { return feasibility_slack(radius); }

  bool in_square(const Vec2& p) const {
    const double tol = slack();
    return std::abs(p.x()) <= half_width + tol && std::abs(p.y()) <= half_width + tol;
  }

  bool clear_of(const Vec2& p, std::size_t obstacle) const {
    return (p - obstacles[obstacle]).norm() >= radius - slack();
  }

  bool feasible(const Vec2& p) const {
    if (!in_square(p)) return false;
    for (std::size_t i = 0; i < obstacles.size(); ++i)
      if (!clear_of(p, i)) return false;
    return true;
  }
};

struct GeometryResult {
  Vec2 point = Vec2::Zero();
  bool ok = true;         // false: no feasible point was found
  bool fallback = false;  // ring sampler was used
  int rounds = 0;
  std::string diagnostic;
};

struct CircleIntersection {
  std::vector<Vec2> points;
  bool coincident = false;
};

inline Vec2 clamp_to_square(const Vec2& p, double half_width) {
  return {std::clamp(p.x(), -half_width, half_width), std::clamp(p.y(), -half_width, half_width)};
}

// Point of the circle on the ray from its centre towards target. A target at
// the centre is pushed out in a seeded random direction.
inline Vec2 line_circle_intersection_sci(const Vec2& center, const Vec2& target, double radius, std::uint64_t seed = 0) {
  const Vec2 d = target - center;
  const double n = d.norm();
  if (n > 0.0) return center + radius * d / n;
  Rng rng(seed, 0, Stream::kGeometry);
  const double a = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return center + radius * Vec2(std::cos(a), std::sin(a));
}

// Intersection of two circles of equal radius.
inline CircleIntersection circle_circle_intersection_cci(const Vec2& a, const Vec2& b, double radius) {
  CircleIntersection out;
  const Vec2 d = b - a;
  const double dist = d.norm();
  if (dist == 0.0) {
    out.coincident = true;
    return out;
  }
  if (dist > 2.0 * radius) return out;
  const Vec2 mid = 0.5 * (a + b);
  const double h2 = radius * radius - 0.25 * dist * dist;
  if (h2 <= 0.0) {
    out.points.push_back(mid);
    return out;
  }
  const Vec2 perp = Vec2(-d.y(), d.x()) / dist;
  const double h = std::sqrt(h2);
  out.points.push_back(mid + h * perp);
  out.points.push_back(mid - h * perp);
  return out;
}

// Crossings of a circle with the four sides of the square.
inline std::vector<Vec2> circle_square_intersections(const Vec2& c, double radius, double half_width) {
  std::vector<Vec2> out;
  for (int axis = 0; axis < 2; ++axis) {
    for (double side : {-half_width, half_width}) {
      const double off = side - c(axis);
      const double h2 = radius * radius - off * off;
      if (h2 < 0.0) continue;
      const double h = std::sqrt(h2);
      for (double s : {-h, h}) {
        Vec2 p;
        p(axis) = side;
        p(1 - axis) = c(1 - axis) + s;
        if (std::abs(p(1 - axis)) <= half_width) out.push_back(p);
        if (h == 0.0) break;
      }
    }
  }
  return out;
}

namespace detail {

inline void square_candidates(const Vec2& sp, double hw, std::vector<Vec2>& out) {
  out.push_back(clamp_to_square(sp, hw));
  for (double s : {-hw, hw}) {
    out.emplace_back(s, std::clamp(sp.y(), -hw, hw));
    out.emplace_back(std::clamp(sp.x(), -hw, hw), s);
  }
  for (double sx : {-hw, hw})
    for (double sy : {-hw, hw}) out.emplace_back(sx, sy);
}

inline void disc_candidates(const Vec2& sp, const FeasibleRegionSpec& spec, const std::vector<std::size_t>& discs,
                            std::uint64_t seed, std::vector<Vec2>& out) {
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const Vec2& c = spec.obstacles[discs[i]];
    out.push_back(line_circle_intersection_sci(c, sp, spec.radius, seed + discs[i]));
    for (const auto& p : circle_square_intersections(c, spec.radius, spec.half_width)) out.push_back(p);
    for (std::size_t j = i + 1; j < discs.size(); ++j)
      for (const auto& p : circle_circle_intersection_cci(c, spec.obstacles[discs[j]], spec.radius).points)
        out.push_back(p);
  }
}

inline bool closer(const Vec2& p, const Vec2& q, const Vec2& sp) {
  const double dp = (p - sp).squaredNorm();
  const double dq = (q - sp).squaredNorm();
  if (dp != dq) return dp < dq;
  if (p.x() != q.x()) return p.x() < q.x();
  return p.y() < q.y();
}

inline std::optional<Vec2> nearest_candidate(const Vec2& sp, const FeasibleRegionSpec& spec,
                                             const std::vector<Vec2>& cands, const std::vector<bool>& active) {
  std::optional<Vec2> best;
  for (const auto& c : cands) {
    if (!spec.in_square(c)) continue;
    bool ok = true;
    for (std::size_t i = 0; i < active.size() && ok; ++i)
      if (active[i] && !spec.clear_of(c, i)) ok = false;
    if (!ok) continue;
    if (!best || closer(c, *best, sp)) best = clamp_to_square(c, spec.half_width);
  }
  return best;
}

// Dense sampling of every obstacle circle and the square boundary.
inline std::optional<Vec2> ring_fallback(const Vec2& sp, const FeasibleRegionSpec& spec) {
  constexpr int kAngles = 1440;
  constexpr int kEdge = 2000;
  std::vector<Vec2> cands;
  cands.push_back(clamp_to_square(sp, spec.half_width));
  for (const auto& c : spec.obstacles)
    for (int k = 0; k < kAngles; ++k) {
      const double a = 2.0 * std::numbers::pi * k / kAngles;
      cands.push_back(c + spec.radius * (1.0 + 1e-9) * Vec2(std::cos(a), std::sin(a)));
    }
  const double hw = spec.half_width;
  for (int k = 0; k <= kEdge; ++k) {
    const double s = -hw + 2.0 * hw * k / kEdge;
    cands.emplace_back(s, -hw);
    cands.emplace_back(s, hw);
    cands.emplace_back(-hw, s);
    cands.emplace_back(hw, s);
  }
  std::optional<Vec2> best;
  for (const auto& c : cands)
    if (spec.feasible(c) && (!best || closer(c, *best, sp))) best = c;
  return best;
}

}  // namespace detail

// Nearest point of the feasible set to sp. Exact mode keeps an active set of
// discs found violated so far and, each round, picks the nearest candidate
// that is feasible for the square and the active discs; the active set only
// grows, so at most obstacles+1 rounds are needed and the result is the true
// minimiser. Simplified mode only builds candidates from discs discovered in
// the current round (plus any the current point sits on).
inline GeometryResult nearest_feasible_point(const Vec2& sp, const FeasibleRegionSpec& spec, bool simplified = false,
                                             std::uint64_t seed = 0) {
  if (!(spec.half_width > 0.0) || !(spec.radius > 0.0)) throw DomainError("region half-width and radius must be positive");
  const std::size_t n = spec.obstacles.size();
  GeometryResult res;
  std::vector<bool> active(n, false);
  std::vector<std::size_t> active_list;
  Vec2 centre = clamp_to_square(sp, spec.half_width);
  const int cap = 4 * static_cast<int>(n + 1);

  for (int round = 0; round < cap; ++round) {
    res.rounds = round + 1;
    std::vector<std::size_t> fresh;
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i] && !spec.clear_of(centre, i)) fresh.push_back(i);
    if (fresh.empty()) {
      res.point = centre;
      return res;
    }
    for (auto i : fresh) {
      active[i] = true;
      active_list.push_back(i);
    }

    std::vector<Vec2> cands;
    if (simplified) {
      std::vector<std::size_t> gen = fresh;
      for (std::size_t i = 0; i < n; ++i)
        if (active[i] && std::find(fresh.begin(), fresh.end(), i) == fresh.end() &&
            std::abs((centre - spec.obstacles[i]).norm() - spec.radius) <= spec.slack())
          gen.push_back(i);
      detail::disc_candidates(sp, spec, gen, seed, cands);
    } else {
      detail::square_candidates(sp, spec.half_width, cands);
      detail::disc_candidates(sp, spec, active_list, seed, cands);
    }
    auto best = detail::nearest_candidate(sp, spec, cands, active);
    if (!best) break;
    centre = *best;
  }

  res.fallback = true;
  if (auto fb = detail::ring_fallback(sp, spec)) {
    res.point = *fb;
    res.diagnostic = "candidate search exhausted; ring sampling used";
  } else {
    res.ok = false;
    res.point = centre;
    res.diagnostic = "no feasible point found";
  }
  return res;
}

}  // namespace prafd
