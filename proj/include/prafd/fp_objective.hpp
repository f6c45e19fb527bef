#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/error.hpp"

namespace prafd {

// Channel matrices for one layout.
struct Channels {
  Eigen::MatrixXcd dl;   // N_t x K_D
  Eigen::MatrixXcd ul;   // N_r x K_U
  Eigen::MatrixXcd si;   // N_r x N_t
  Eigen::MatrixXcd iui;  // K_D x K_U
};

inline Channels build_channels(const AntennaLayout& layout, const ChannelRealization& ch) {
  return {build_downlink_channel(layout.t, ch), build_uplink_channel(layout.r, ch),
          build_si_channel(layout.t, layout.r, ch), ch.iui};
}

// Optimisation variables plus the two families of FP auxiliary variables.
// gamma and y are ordered [DL users..., UL users...].
struct SolverState {
  Eigen::MatrixXcd W_t;  // N_t x K_D
  Eigen::MatrixXcd W_r;  // N_r x K_U
  Eigen::VectorXd p_u;   // K_U
  Eigen::VectorXd gamma;
  Eigen::VectorXcd y;
};

namespace detail {

// Per-user signal / interference bookkeeping shared by the SINR, rate and
// FP expressions. `s` is the full received power (desired term included).
struct LinkTerms {
  Eigen::VectorXcd x;       // desired amplitude: h^H w for DL, h^H w_r for UL
  Eigen::VectorXd signal;   // |desired|^2, scaled by p for UL
  Eigen::VectorXd interf;   // interference + noise
  Eigen::VectorXd s;        // signal + interference + noise
};

inline LinkTerms downlink_terms(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  if (!(cfg.sigma2 > 0.0)) throw DomainError("noise power must be positive");
  const Eigen::MatrixXcd X = ch.dl.adjoint() * st.W_t;  // X(k, i) = h_k^H w_i
  LinkTerms t;
  t.x = X.diagonal();
  t.signal = t.x.cwiseAbs2();
  t.interf.resize(X.rows());
  for (Eigen::Index k = 0; k < X.rows(); ++k) {
    double mui = 0.0;
    for (Eigen::Index i = 0; i < X.cols(); ++i)
      if (i != k) mui += std::norm(X(k, i));
    t.interf(k) = mui;
  }
  if (ch.iui.cols() > 0) t.interf += ch.iui.cwiseAbs2() * st.p_u;
  t.interf.array() += cfg.sigma2;
  t.s = t.signal + t.interf;
  return t;
}

inline LinkTerms uplink_terms(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  if (!(cfg.sigma2 > 0.0)) throw DomainError("noise power must be positive");
  const Eigen::Index K = ch.ul.cols();
  LinkTerms t;
  t.x.resize(K);
  t.signal.resize(K);
  t.s.resize(K);
  t.interf.resize(K);
  if (K == 0) return t;
  const Eigen::MatrixXcd Z = st.W_r.adjoint() * ch.ul;  // Z(k, i) = w_k^H h_i
  const Eigen::MatrixXcd S = st.W_r.adjoint() * ch.si * st.W_t;
  for (Eigen::Index k = 0; k < K; ++k) {
    const double wn = st.W_r.col(k).squaredNorm();
    if (!(wn > 0.0)) throw DomainError("receive beamformer column " + std::to_string(k) + " is zero");
    double interf = 0.0;
    for (Eigen::Index i = 0; i < K; ++i)
      if (i != k) interf += st.p_u(i) * std::norm(Z(k, i));
    interf += S.row(k).squaredNorm() + wn * cfg.sigma2;
    t.x(k) = std::conj(Z(k, k));
    t.signal(k) = st.p_u(k) * std::norm(Z(k, k));
    t.interf(k) = interf;
    t.s(k) = t.signal(k) + interf;
  }
  return t;
}

}  // namespace detail

inline Eigen::VectorXd sinr_downlink(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto t = detail::downlink_terms(st, ch, cfg);
  return (t.signal.array() / t.interf.array()).matrix();
}

inline Eigen::VectorXd sinr_uplink(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto t = detail::uplink_terms(st, ch, cfg);
  return (t.signal.array() / t.interf.array()).matrix();
}

inline Eigen::VectorXd downlink_rates(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  return sinr_downlink(st, ch, cfg).unaryExpr([](double g) { return std::log2(1.0 + g); });
}

inline Eigen::VectorXd uplink_rates(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  return sinr_uplink(st, ch, cfg).unaryExpr([](double g) { return std::log2(1.0 + g); });
}

// Weighted sum-rate in bits/s/Hz.
inline double weighted_sum_rate(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto rd = downlink_rates(st, ch, cfg);
  const auto ru = uplink_rates(st, ch, cfg);
  double r = 0.0;
  for (Eigen::Index k = 0; k < rd.size(); ++k) r += cfg.weight(static_cast<int>(k)) * rd(k);
  for (Eigen::Index k = 0; k < ru.size(); ++k) r += cfg.weight(static_cast<int>(rd.size() + k)) * ru(k);
  return r;
}

// Closed-form optimal Lagrangian-dual auxiliary: the current SINRs.
inline Eigen::VectorXd update_gamma(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto gd = sinr_downlink(st, ch, cfg);
  const auto gu = sinr_uplink(st, ch, cfg);
  Eigen::VectorXd g(gd.size() + gu.size());
  g << gd, gu;
  return g;
}

// Closed-form optimal quadratic-transform auxiliary for the current gamma.
// Denominators include every beam / user plus noise.
inline Eigen::VectorXcd update_y(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto td = detail::downlink_terms(st, ch, cfg);
  const auto tu = detail::uplink_terms(st, ch, cfg);
  const Eigen::Index KD = td.x.size();
  const Eigen::Index KU = tu.x.size();
  if (st.gamma.size() != KD + KU) throw DomainError("gamma has the wrong length");
  Eigen::VectorXcd y(KD + KU);
  for (Eigen::Index k = 0; k < KD; ++k) {
    if (!(td.s(k) > 0.0)) throw InternalError("non-positive DL denominator");
    y(k) = std::sqrt(cfg.weight(static_cast<int>(k)) * (1.0 + st.gamma(k))) * td.x(k) / td.s(k);
  }
  for (Eigen::Index u = 0; u < KU; ++u) {
    if (!(tu.s(u) > 0.0)) throw InternalError("non-positive UL denominator");
    const Eigen::Index i = KD + u;
    y(i) = std::sqrt(cfg.weight(static_cast<int>(i)) * st.p_u(u) * (1.0 + st.gamma(i))) * tu.x(u) / tu.s(u);
  }
  return y;
}

// Lagrangian-dual objective for an arbitrary gamma, expressed in bits
// (natural-log objective divided by ln 2). Equals the weighted sum-rate
// when gamma is the SINR vector.
inline double lagrangian_dual_objective(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg,
                                        const Eigen::VectorXd& gamma) {
  const auto td = detail::downlink_terms(st, ch, cfg);
  const auto tu = detail::uplink_terms(st, ch, cfg);
  const Eigen::Index KD = td.x.size();
  double v = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) {
    const double a = cfg.weight(static_cast<int>(i));
    v += a * (std::log1p(gamma(i)) - gamma(i));
    const double frac = i < KD ? td.signal(i) / td.s(i) : tu.signal(i - KD) / tu.s(i - KD);
    v += a * (1.0 + gamma(i)) * frac;
  }
  return v / std::numbers::ln2;
}

// Quadratic-transform surrogate at (state, state.gamma, state.y), in bits.
inline double quadratic_transform_objective(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto td = detail::downlink_terms(st, ch, cfg);
  const auto tu = detail::uplink_terms(st, ch, cfg);
  const Eigen::Index KD = td.x.size();
  const Eigen::Index KU = tu.x.size();
  double v = 0.0;
  for (Eigen::Index i = 0; i < KD + KU; ++i) {
    const double a = cfg.weight(static_cast<int>(i));
    const double g = st.gamma(i);
    v += a * (std::log1p(g) - g);
    if (i < KD) {
      v += 2.0 * std::sqrt(a * (1.0 + g)) * std::real(std::conj(st.y(i)) * td.x(i)) - std::norm(st.y(i)) * td.s(i);
    } else {
      const Eigen::Index u = i - KD;
      v += 2.0 * std::sqrt(a * st.p_u(u) * (1.0 + g)) * std::real(std::conj(st.y(i)) * tu.x(u)) -
           std::norm(st.y(i)) * tu.s(u);
    }
  }
  return v / std::numbers::ln2;
}

}  // namespace prafd
