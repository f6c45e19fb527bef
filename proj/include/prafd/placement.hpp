#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "prafd/beamformer.hpp"
#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/fp_objective.hpp"
#include "prafd/geometry.hpp"
#include "prafd/rng.hpp"

namespace prafd {

enum class Side { kTransmit, kReceive };

// Everything held fixed while one side's antenna positions move. The
// objective minimised is
//   f = -2 Re sum_k lin_k (W^H H)_kk + sum_k q_k h_k^H Cs h_k + Tr(Ct Hsi^H B Hsi)
// where H is the moving side's user channel and Hsi the SI channel.
struct SurrogateContext {
  Side side = Side::kTransmit;
  ChannelRealization realization;
  Points fixed;          // positions of the other side
  Eigen::MatrixXcd W;    // beamformer of the moving side
  Eigen::VectorXcd lin;
  Eigen::VectorXd q;
  Eigen::MatrixXcd Cs;   // quadratic weight of the user term
  Eigen::MatrixXcd Ct;   // W_t W_t^H
  Eigen::MatrixXcd B;    // W_r |Y_U|^2 W_r^H
  double half_width = 0.0;
  double d_min = 0.0;
  double tau_min_factor = 1e-6;

  double lambda() const { return realization.lambda; }
};

inline SurrogateContext make_surrogate_context(Side side, const SolverState& st, const ChannelRealization& ch,
                                               const ScenarioConfig& cfg, const AntennaLayout& layout) {
  const Eigen::Index KD = st.W_t.cols();
  const Eigen::Index KU = st.W_r.cols();
  SurrogateContext c;
  c.side = side;
  c.realization = ch;
  c.half_width = cfg.half_width();
  c.d_min = cfg.min_distance();
  c.Ct = st.W_t * st.W_t.adjoint();
  const Eigen::VectorXcd yu = st.y.tail(KU);
  const Eigen::MatrixXcd WY = st.W_r * yu.cwiseAbs().asDiagonal();
  c.B = WY * WY.adjoint();
  if (side == Side::kTransmit) {
    c.fixed = layout.r;
    c.W = st.W_t;
    const auto a = detail::weight_gamma_factor(cfg, st.gamma, 0, KD);
    c.lin = (a.cast<cd>().array() * st.y.head(KD).array()).matrix();
    c.q = st.y.head(KD).cwiseAbs2();
    c.Cs = c.Ct;
  } else {
    c.fixed = layout.t;
    c.W = st.W_r;
    const auto a = detail::weight_gamma_factor(cfg, st.gamma, KD, KU);
    c.lin.resize(KU);
    for (Eigen::Index u = 0; u < KU; ++u) c.lin(u) = a(u) * std::sqrt(st.p_u(u)) * yu(u);
    c.q = st.p_u;
    c.Cs = c.B;
  }
  return c;
}

namespace detail {

inline Eigen::MatrixXcd side_user_channel(const SurrogateContext& c, std::span<const Vec2> pos) {
  return c.side == Side::kTransmit ? build_downlink_channel(pos, c.realization) : build_uplink_channel(pos, c.realization);
}

inline Eigen::MatrixXcd side_si_channel(const SurrogateContext& c, std::span<const Vec2> pos) {
  return c.side == Side::kTransmit ? build_si_channel(pos, c.fixed, c.realization)
                                   : build_si_channel(c.fixed, pos, c.realization);
}

inline const std::vector<PathAngles>& side_user_paths(const SurrogateContext& c) {
  return c.side == Side::kTransmit ? c.realization.geometry.dl : c.realization.geometry.ul;
}

inline const std::vector<Eigen::VectorXcd>& side_user_prm(const SurrogateContext& c) {
  return c.side == Side::kTransmit ? c.realization.prm_dl : c.realization.prm_ul;
}

}  // namespace detail

// Exact objective via a full channel rebuild.
inline double placement_objective(const SurrogateContext& c, std::span<const Vec2> pos) {
  const Eigen::MatrixXcd H = detail::side_user_channel(c, pos);
  const Eigen::MatrixXcd S = detail::side_si_channel(c, pos);
  double f = 0.0;
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    const auto h = H.col(k);
    f -= 2.0 * std::real(c.lin(k) * c.W.col(k).dot(h));
    f += c.q(k) * h.dot(c.Cs * h).real();
  }
  f += (c.Ct * S.adjoint() * c.B * S).trace().real();
  return f;
}

// One antenna's objective as a function of its own position x:
//   f(x) = c0 + sum_p Re(coef_p exp(j v_p . x)).
struct PhasePolynomial {
  double c0 = 0.0;
  std::vector<cd> coef;
  std::vector<Vec2> freq;

  void add(cd c, const Vec2& v) {
    coef.push_back(c);
    freq.push_back(v);
  }

  double value(const Vec2& x) const {
    double f = c0;
    for (std::size_t p = 0; p < coef.size(); ++p) f += std::real(coef[p] * std::polar(1.0, freq[p].dot(x)));
    return f;
  }

  Vec2 gradient(const Vec2& x) const {
    Vec2 g = Vec2::Zero();
    for (std::size_t p = 0; p < coef.size(); ++p) g -= std::imag(coef[p] * std::polar(1.0, freq[p].dot(x))) * freq[p];
    return g;
  }

  Eigen::Matrix2d hessian(const Vec2& x) const {
    Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
    for (std::size_t p = 0; p < coef.size(); ++p)
      h -= std::real(coef[p] * std::polar(1.0, freq[p].dot(x))) * freq[p] * freq[p].transpose();
    return h;
  }

  // Bound on the Hessian's spectral norm anywhere in the plane.
  double curvature_scale() const {
    double s = 0.0;
    for (std::size_t p = 0; p < coef.size(); ++p) s += std::abs(coef[p]) * freq[p].squaredNorm();
    return s;
  }
};

inline PhasePolynomial phase_polynomial(const SurrogateContext& c, std::span<const Vec2> pos, std::size_t n) {
  if (n >= pos.size()) throw DomainError("antenna index out of range");
  const double kappa = wavenumber(c.lambda());
  const auto N = static_cast<Eigen::Index>(n);
  const Eigen::MatrixXcd H = detail::side_user_channel(c, pos);
  const Eigen::MatrixXcd S = detail::side_si_channel(c, pos);
  const auto& paths = detail::side_user_paths(c);
  const auto& prm = detail::side_user_prm(c);
  PhasePolynomial poly;

  // User terms: H(n, k) = sum_l sigma_l exp(-j kappa n_l . x).
  for (Eigen::Index k = 0; k < H.cols(); ++k) {
    const auto wv = wave_vectors(paths[static_cast<std::size_t>(k)]);
    const Eigen::VectorXcd& sig = prm[static_cast<std::size_t>(k)];
    const cd zeta = (c.Cs.row(N) * H.col(k)).value() - c.Cs(N, N) * H(N, k);  // sum_{m != n} Cs(n,m) H(m,k)
    const cd alpha = c.lin(k) * std::conj(c.W(N, k));
    const cd lc = 2.0 * (c.q(k) * std::conj(zeta) - alpha);
    const double quad = c.q(k) * c.Cs(N, N).real();
    for (std::size_t l = 0; l < wv.size(); ++l) {
      const auto L = static_cast<Eigen::Index>(l);
      poly.add(lc * sig(L), -kappa * wv[l]);
      if (quad != 0.0)
        for (std::size_t m = l + 1; m < wv.size(); ++m)
          poly.add(2.0 * quad * std::conj(sig(L)) * sig(static_cast<Eigen::Index>(m)), kappa * (wv[l] - wv[m]));
    }
  }

  // Self-interference term.
  const auto& g = c.realization.geometry;
  if (c.side == Side::kTransmit) {
    const auto nt = wave_vectors(g.si_tx);
    const Eigen::MatrixXcd M = field_response_matrix(c.fixed, g.si_rx, c.lambda()).adjoint() * c.realization.prm_si;
    const Eigen::VectorXcd xi = S * c.Ct.col(N) - S.col(N) * c.Ct(N, N);  // sum_{a != n} Ct(a,n) S col a
    const Eigen::VectorXcd d = M.adjoint() * (c.B * xi);
    const Eigen::MatrixXcd Q = M.adjoint() * c.B * M;
    const double cnn = c.Ct(N, N).real();
    for (std::size_t p = 0; p < nt.size(); ++p) {
      const auto P = static_cast<Eigen::Index>(p);
      poly.add(2.0 * std::conj(d(P)), kappa * nt[p]);
      if (cnn != 0.0)
        for (std::size_t q = p + 1; q < nt.size(); ++q)
          poly.add(2.0 * cnn * Q(P, static_cast<Eigen::Index>(q)), kappa * (nt[q] - nt[p]));
    }
  } else {
    const auto nr = wave_vectors(g.si_rx);
    const Eigen::MatrixXcd R = c.realization.prm_si * field_response_matrix(c.fixed, g.si_tx, c.lambda());
    // xi = sum_{a != n} B(a,n) rho_a^H, with rho_a the a-th row of S.
    const Eigen::VectorXcd xi = S.adjoint() * c.B.col(N) - S.row(N).adjoint() * c.B(N, N);
    const Eigen::VectorXcd gv = R * (c.Ct * xi);
    const Eigen::MatrixXcd Q = R * c.Ct * R.adjoint();
    const double bnn = c.B(N, N).real();
    for (std::size_t p = 0; p < nr.size(); ++p) {
      const auto P = static_cast<Eigen::Index>(p);
      poly.add(2.0 * gv(P), -kappa * nr[p]);
      if (bnn != 0.0)
        for (std::size_t q = p + 1; q < nr.size(); ++q)
          poly.add(2.0 * bnn * Q(P, static_cast<Eigen::Index>(q)), kappa * (nr[q] - nr[p]));
    }
  }

  poly.c0 = placement_objective(c, pos) - poly.value(pos[n]);
  return poly;
}

inline Vec2 placement_gradient(const SurrogateContext& c, std::span<const Vec2> pos, std::size_t n) {
  return phase_polynomial(c, pos, n).gradient(pos[n]);
}

enum class HessianMode { kAnalytic, kFiniteDifference };

inline Eigen::Matrix2d placement_hessian(const SurrogateContext& c, std::span<const Vec2> pos, std::size_t n,
                                         HessianMode mode = HessianMode::kAnalytic) {
  const auto poly = phase_polynomial(c, pos, n);
  if (mode == HessianMode::kAnalytic) return poly.hessian(pos[n]);
  const double h = 1e-6 * c.lambda();
  Eigen::Matrix2d H;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    H.col(i) = (poly.gradient(pos[n] + e) - poly.gradient(pos[n] - e)) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

inline double tau_floor(const PhasePolynomial& poly, double factor = 1e-6) {
  return std::max(factor * poly.curvature_scale(), DBL_MIN);
}

inline double largest_eigenvalue(const Eigen::Matrix2d& H) {
  const double tr = 0.5 * (H(0, 0) + H(1, 1));
  const double det = H(0, 0) * H(1, 1) - 0.25 * (H(0, 1) + H(1, 0)) * (H(0, 1) + H(1, 0));
  return tr + std::sqrt(std::max(tr * tr - det, 0.0));
}

inline double curvature_bound(const SurrogateContext& c, std::span<const Vec2> pos, std::size_t n,
                              HessianMode mode = HessianMode::kAnalytic) {
  const auto poly = phase_polynomial(c, pos, n);
  const double floor = tau_floor(poly, c.tau_min_factor);
  return std::max(largest_eigenvalue(placement_hessian(c, pos, n, mode)), floor);
}

inline Vec2 surrogate_stationary_point(const Vec2& current, const Vec2& gradient, double tau) {
  if (!(tau > 0.0)) throw DomainError("surrogate curvature must be positive");
  return current - gradient / tau;
}

// Quadratic upper-bound surrogate around x0.
inline double surrogate_value(double f0, const Vec2& x0, const Vec2& gradient, double tau, const Vec2& x) {
  const Vec2 d = x - x0;
  return f0 + gradient.dot(d) + 0.5 * tau * d.squaredNorm();
}

inline FeasibleRegionSpec region_without(const SurrogateContext& c, std::span<const Vec2> pos, std::size_t n) {
  FeasibleRegionSpec spec;
  spec.half_width = c.half_width;
  spec.radius = c.d_min;
  for (std::size_t i = 0; i < pos.size(); ++i)
    if (i != n) spec.obstacles.push_back(pos[i]);
  return spec;
}

struct BsumOptions {
  int max_sweeps = 50;
  double epsilon = 1e-3;
  bool simplified_geometry = false;
  int max_tau_doublings = 20;
};

struct BsumResult {
  Points positions;
  std::vector<double> trace;  // objective before the first sweep and after each sweep
  int sweeps = 0;
  int rejected_steps = 0;     // tau doublings
  int stalled_moves = 0;      // antennas left in place after all doublings
  int geometry_failures = 0;
  int geometry_fallbacks = 0;
};

// Antenna-by-antenna majorise-minimise on one side, in a fresh random order
// each sweep.
inline BsumResult bsum_optimize_side(const SurrogateContext& c, const Points& start, const BsumOptions& opts, Rng& rng) {
  if (!side_feasible(start, c.half_width, c.d_min)) throw DomainError("BSUM start layout is infeasible");
  BsumResult res;
  res.positions = start;
  auto& pos = res.positions;
  double f = placement_objective(c, pos);
  res.trace.push_back(f);
  std::vector<std::size_t> order(pos.size());

  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);

    for (std::size_t n : order) {
      const auto poly = phase_polynomial(c, pos, n);
      const Vec2 x = pos[n];
      const Vec2 g = poly.gradient(x);
      if (g.squaredNorm() == 0.0) continue;
      const double f_old = poly.value(x);
      double tau = std::max(largest_eigenvalue(poly.hessian(x)), tau_floor(poly, c.tau_min_factor));
      const auto spec = region_without(c, pos, n);
      bool moved = false;
      for (int attempt = 0; attempt <= opts.max_tau_doublings; ++attempt) {
        const Vec2 sp = surrogate_stationary_point(x, g, tau);
        const auto gr = nearest_feasible_point(sp, spec, opts.simplified_geometry, rng.bits());
        if (gr.fallback) ++res.geometry_fallbacks;
        if (!gr.ok) {
          ++res.geometry_failures;
          break;
        }
        if (poly.value(gr.point) <= f_old) {
          pos[n] = gr.point;
          moved = true;
          break;
        }
        ++res.rejected_steps;
        tau *= 2.0;
      }
      if (!moved) ++res.stalled_moves;
    }

    ++res.sweeps;
    const double f_new = placement_objective(c, pos);
    res.trace.push_back(f_new);
    const double change = std::abs(f - f_new);
    f = f_new;
    if (change <= opts.epsilon * std::abs(res.trace[res.trace.size() - 2]) || change == 0.0) break;
  }
  return res;
}

}  // namespace prafd
