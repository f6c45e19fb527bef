#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "prafd/config.hpp"
#include "prafd/error.hpp"
#include "prafd/fp_objective.hpp"

namespace prafd {

struct BisectionOptions {
  double tolerance = 1e-12;  // relative power mismatch on the feasible side
  int max_iterations = 200;
};

struct TransmitDiagnostics {
  double mu = 0.0;
  int iterations = 0;
  double power = 0.0;
  bool bracket_decreasing = true;  // f(mu_lo) > f(mu_hi) on the final bracket
  bool singular = false;
};

struct TransmitUpdate {
  Eigen::MatrixXcd W;
  TransmitDiagnostics diag;
};

// Data of the transmit block: maximise 2 Re Tr(Hbar^H W) - Tr(W^H Ht W)
// subject to Tr(W W^H) <= p.
struct TransmitProblem {
  Eigen::MatrixXcd Ht;
  Eigen::MatrixXcd Hbar;
};

// Data of the receive block: per column u maximise
// 2 Re{conj(y_u) hbar_u^H w_u} - |y_u|^2 w_u^H Hr w_u.
struct ReceiveProblem {
  Eigen::MatrixXcd Hr;
  Eigen::MatrixXcd Hbar;
  Eigen::VectorXcd y;
};

namespace detail {

inline Eigen::VectorXd weight_gamma_factor(const ScenarioConfig& cfg, const Eigen::VectorXd& gamma, Eigen::Index offset,
                                           Eigen::Index count) {
  Eigen::VectorXd a(count);
  for (Eigen::Index i = 0; i < count; ++i)
    a(i) = std::sqrt(cfg.weight(static_cast<int>(offset + i)) * (1.0 + gamma(offset + i)));
  return a;
}

}  // namespace detail

inline TransmitProblem transmit_problem(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const Eigen::Index KD = ch.dl.cols();
  const Eigen::Index KU = ch.ul.cols();
  const Eigen::VectorXcd yd = st.y.head(KD);
  const Eigen::VectorXcd yu = st.y.tail(KU);
  TransmitProblem p;
  const Eigen::MatrixXcd HY = ch.dl * yd.asDiagonal();
  p.Ht = HY * HY.adjoint();
  if (KU > 0) {
    const Eigen::MatrixXcd B = ch.si.adjoint() * st.W_r * yu.cwiseAbs().asDiagonal();
    p.Ht += B * B.adjoint();
  }
  p.Hbar = HY * detail::weight_gamma_factor(cfg, st.gamma, 0, KD).asDiagonal();
  return p;
}

inline double transmit_objective(const TransmitProblem& p, const Eigen::MatrixXcd& W) {
  return 2.0 * (p.Hbar.adjoint() * W).trace().real() - (W.adjoint() * p.Ht * W).trace().real();
}

// Solves the power-constrained quadratic block through the eigendecomposition
// of Ht: W(mu) = V diag(1/(lambda + mu)) V^H Hbar, with mu found by bisection
// when the unconstrained solution exceeds the budget.
inline TransmitUpdate solve_transmit_problem(const TransmitProblem& prob, double p_max, const BisectionOptions& opts = {}) {
  if (!(p_max > 0.0)) throw DomainError("transmit power budget must be positive");
  const Eigen::Index N = prob.Ht.rows();
  if (prob.Ht.cols() != N || prob.Hbar.rows() != N) throw DomainError("transmit problem dimensions disagree");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(prob.Ht);
  if (es.info() != Eigen::Success) throw InternalError("eigendecomposition of Ht failed");
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
  const Eigen::MatrixXcd& V = es.eigenvectors();
  const Eigen::MatrixXcd B = V.adjoint() * prob.Hbar;
  const Eigen::VectorXd e = B.rowwise().squaredNorm();  // [V^H Hbar Hbar^H V]_ii

  const double lam_max = N > 0 ? lam.maxCoeff() : 0.0;
  const double zero_tol = 1e-13 * std::max(lam_max, 1e-300);
  const double energy = e.sum();

  auto power = [&](double mu) {
    double f = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      const double d = lam(i) + mu;
      if (d > zero_tol || mu > 0.0) f += e(i) / (d * d);
    }
    return f;
  };
  auto beamformer = [&](double mu) {
    Eigen::VectorXd inv(N);
    for (Eigen::Index i = 0; i < N; ++i) {
      const double d = lam(i) + mu;
      inv(i) = (d > zero_tol || mu > 0.0) ? 1.0 / d : 0.0;
    }
    return Eigen::MatrixXcd(V * inv.asDiagonal() * B);
  };

  TransmitUpdate out;
  if (!(energy > 0.0)) {
    out.W = Eigen::MatrixXcd::Zero(N, prob.Hbar.cols());
    return out;
  }

  double null_energy = 0.0;
  for (Eigen::Index i = 0; i < N; ++i)
    if (lam(i) <= zero_tol) null_energy += e(i);
  const bool unbounded = null_energy > 1e-14 * energy;
  out.diag.singular = lam.minCoeff() <= zero_tol;

  if (!unbounded) {
    const double f0 = power(0.0);
    if (f0 <= p_max) {
      out.W = beamformer(0.0);
      out.diag.power = f0;
      return out;
    }
  }

  double hi = std::sqrt(energy / p_max);
  double lo = 0.0;
  if (unbounded) {
    const double trace = lam.sum();
    lo = trace > 0.0 ? 1e-12 * trace / static_cast<double>(N) : 0.0;
    if (lo >= hi || !(power(lo) > p_max)) lo = 0.0;
  }
  // Probe a tiny positive lower end so the search can use geometric steps.
  if (lo == 0.0) {
    const double probe = hi * 1e-18;
    if (power(probe) > p_max) lo = probe;
    else hi = probe;
  }

  double f_hi = power(hi);
  if (f_hi > p_max * (1.0 + 1e-12)) throw InternalError("bisection upper bracket is infeasible");
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    if (std::abs(f_hi - p_max) <= opts.tolerance * p_max) break;
    const double mid = (lo > 0.0 && hi > 1e3 * lo) ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    const double fm = power(mid);
    if (fm > p_max) {
      lo = mid;
    } else {
      hi = mid;
      f_hi = fm;
    }
  }
  out.diag.mu = hi;
  out.diag.iterations = it;
  out.diag.power = f_hi;
  out.diag.bracket_decreasing = lo == 0.0 ? true : power(lo) > f_hi;
  out.W = beamformer(hi);
  return out;
}

inline TransmitUpdate update_transmit_beamformer(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg,
                                                 const BisectionOptions& opts = {}) {
  return solve_transmit_problem(transmit_problem(st, ch, cfg), cfg.p_D_max, opts);
}

inline ReceiveProblem receive_problem(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const Eigen::Index KD = ch.dl.cols();
  const Eigen::Index KU = ch.ul.cols();
  ReceiveProblem p;
  const Eigen::MatrixXcd HP = ch.ul * st.p_u.cwiseSqrt().asDiagonal();
  const Eigen::MatrixXcd S = ch.si * st.W_t;
  p.Hr = HP * HP.adjoint() + S * S.adjoint();
  p.Hr.diagonal().array() += cfg.sigma2;
  p.Hbar = HP * detail::weight_gamma_factor(cfg, st.gamma, KD, KU).asDiagonal();
  p.y = st.y.tail(KU);
  return p;
}

inline double receive_objective(const ReceiveProblem& p, const Eigen::MatrixXcd& W) {
  double v = 0.0;
  for (Eigen::Index u = 0; u < W.cols(); ++u) {
    const auto w = W.col(u);
    v += 2.0 * std::real(std::conj(p.y(u)) * p.Hbar.col(u).dot(w)) - std::norm(p.y(u)) * w.dot(p.Hr * w).real();
  }
  return v;
}

// Tr(Hbar^H Hr^{-1} Hbar): the receive block's optimal value.
inline double receive_optimal_value(const ReceiveProblem& p) {
  Eigen::LLT<Eigen::MatrixXcd> llt(p.Hr);
  if (llt.info() != Eigen::Success) throw InternalError("Hr is not positive definite");
  return (p.Hbar.adjoint() * llt.solve(p.Hbar)).trace().real();
}

// Columns with y_u = 0 keep their previous value.
inline Eigen::MatrixXcd solve_receive_problem(const ReceiveProblem& p, const Eigen::MatrixXcd& W_prev) {
  Eigen::LLT<Eigen::MatrixXcd> llt(p.Hr);
  if (llt.info() != Eigen::Success) throw InternalError("Hr is not positive definite");
  const Eigen::MatrixXcd X = llt.solve(p.Hbar);
  Eigen::MatrixXcd W = W_prev;
  for (Eigen::Index u = 0; u < X.cols(); ++u)
    if (p.y(u) != cd(0.0, 0.0)) W.col(u) = X.col(u) / std::conj(p.y(u));
  return W;
}

inline Eigen::MatrixXcd update_receive_beamformer(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  return solve_receive_problem(receive_problem(st, ch, cfg), st.W_r);
}

inline Eigen::MatrixXcd normalize_receive_columns(const Eigen::MatrixXcd& W) {
  Eigen::MatrixXcd out = W;
  for (Eigen::Index u = 0; u < W.cols(); ++u) {
    const double n = W.col(u).norm();
    if (!(n > 0.0)) throw DomainError("cannot normalise zero receive column " + std::to_string(u));
    out.col(u) /= n;
  }
  return out;
}

// argmax over p in [0, p_max] of c1 sqrt(p) - c2 p.
inline double optimal_uplink_power(double c1, double c2, double p_max) {
  if (c1 <= 0.0) return 0.0;
  if (!(c2 > 0.0)) return p_max;
  const double root = c1 / (2.0 * c2);
  return std::min(root * root, p_max);
}

struct PowerCoefficients {
  Eigen::VectorXd c1;
  Eigen::VectorXd c2;
};

inline PowerCoefficients uplink_power_coefficients(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const Eigen::Index KD = ch.dl.cols();
  const Eigen::Index KU = ch.ul.cols();
  PowerCoefficients c{Eigen::VectorXd::Zero(KU), Eigen::VectorXd::Zero(KU)};
  if (KU == 0) return c;
  const Eigen::MatrixXcd Z = st.W_r.adjoint() * ch.ul;  // Z(j, u) = w_j^H h_u
  const auto a = detail::weight_gamma_factor(cfg, st.gamma, KD, KU);
  for (Eigen::Index u = 0; u < KU; ++u) {
    const cd x = std::conj(Z(u, u));
    c.c1(u) = 2.0 * a(u) * std::real(std::conj(st.y(KD + u)) * x);
    double c2 = 0.0;
    for (Eigen::Index k = 0; k < KD; ++k) c2 += std::norm(st.y(k)) * std::norm(ch.iui(k, u));
    for (Eigen::Index j = 0; j < KU; ++j) c2 += std::norm(st.y(KD + j)) * std::norm(Z(j, u));
    c.c2(u) = c2;
  }
  return c;
}

inline Eigen::VectorXd update_uplink_power(const SolverState& st, const Channels& ch, const ScenarioConfig& cfg) {
  const auto c = uplink_power_coefficients(st, ch, cfg);
  Eigen::VectorXd p(c.c1.size());
  for (Eigen::Index u = 0; u < p.size(); ++u) p(u) = optimal_uplink_power(c.c1(u), c.c2(u), cfg.p_U_max);
  return p;
}

}  // namespace prafd
