#pragma once

// Brute-force reference computations. None of these share code paths with
// the solver beyond the plain data types.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <algorithm>
#include <limits>
#include <numbers>
#include <vector>

#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/fp_objective.hpp"
#include "prafd/geometry.hpp"

namespace prafd::oracle {

using cd = std::complex<double>;

inline cd phase(double lambda, double theta, double phi, const Vec2& p) {
  const double k = 2.0 * std::numbers::pi / lambda;
  return std::exp(cd(0.0, k * (p.x() * std::sin(theta) * std::cos(phi) + p.y() * std::cos(theta))));
}

// h[n] = sum_l conj(g_l(p_n)) sigma_l for every user.
inline Eigen::MatrixXcd user_channel_sum(const Points& pos, const std::vector<PathAngles>& paths,
                                         const std::vector<Eigen::VectorXcd>& prm, double lambda) {
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(pos.size()), static_cast<Eigen::Index>(prm.size()));
  for (std::size_t k = 0; k < prm.size(); ++k)
    for (std::size_t n = 0; n < pos.size(); ++n)
      for (std::size_t l = 0; l < paths[k].size(); ++l)
        H(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) +=
            std::conj(phase(lambda, paths[k].theta[l], paths[k].phi[l], pos[n])) * prm[k](static_cast<Eigen::Index>(l));
  return H;
}

// H_SI[i, j] = sum_p sum_q conj(f_p(r_i)) Sigma[p, q] g_q(t_j).
inline Eigen::MatrixXcd si_channel_sum(const Points& t, const Points& r, const ChannelRealization& ch) {
  const auto& g = ch.geometry;
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(r.size()), static_cast<Eigen::Index>(t.size()));
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j)
      for (std::size_t p = 0; p < g.si_rx.size(); ++p)
        for (std::size_t q = 0; q < g.si_tx.size(); ++q)
          H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
              std::conj(phase(ch.lambda, g.si_rx.theta[p], g.si_rx.phi[p], r[i])) *
              ch.prm_si(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) *
              phase(ch.lambda, g.si_tx.theta[q], g.si_tx.phi[q], t[j]);
  return H;
}

// SINRs from the received-signal expansion, user by user.
inline std::vector<double> downlink_sinr_direct(const Eigen::MatrixXcd& Hd, const Eigen::MatrixXcd& Wt,
                                                const Eigen::MatrixXcd& iui, const Eigen::VectorXd& pu, double sigma2) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < Hd.cols(); ++k) {
    double sig = 0.0, intf = sigma2;
    for (Eigen::Index i = 0; i < Wt.cols(); ++i) {
      cd x = 0.0;
      for (Eigen::Index n = 0; n < Hd.rows(); ++n) x += std::conj(Hd(n, k)) * Wt(n, i);
      (i == k ? sig : intf) += std::norm(x);
    }
    for (Eigen::Index u = 0; u < pu.size(); ++u) intf += std::norm(iui(k, u)) * pu(u);
    out.push_back(sig / intf);
  }
  return out;
}

inline std::vector<double> uplink_sinr_direct(const Eigen::MatrixXcd& Hu, const Eigen::MatrixXcd& Hsi,
                                              const Eigen::MatrixXcd& Wt, const Eigen::MatrixXcd& Wr,
                                              const Eigen::VectorXd& pu, double sigma2) {
  std::vector<double> out;
  for (Eigen::Index k = 0; k < Hu.cols(); ++k) {
    auto proj = [&](const Eigen::VectorXcd& v) {
      cd x = 0.0;
      for (Eigen::Index n = 0; n < Wr.rows(); ++n) x += std::conj(Wr(n, k)) * v(n);
      return x;
    };
    double sig = 0.0, intf = 0.0;
    for (Eigen::Index i = 0; i < Hu.cols(); ++i) (i == k ? sig : intf) += pu(i) * std::norm(proj(Hu.col(i)));
    for (Eigen::Index j = 0; j < Wt.cols(); ++j) intf += std::norm(proj(Hsi * Wt.col(j)));
    intf += Wr.col(k).squaredNorm() * sigma2;
    out.push_back(sig / intf);
  }
  return out;
}

// Accelerated projected gradient ascent on
//   max 2 Re Tr(Hbar^H W) - Tr(W^H Ht W)  s.t. ||W||_F^2 <= p.
inline Eigen::MatrixXcd projected_gradient_qp(const Eigen::MatrixXcd& Ht, const Eigen::MatrixXcd& Hbar, double p,
                                              int iterations = 20000) {
  const double L = 2.0 * std::max(Ht.operatorNorm(), 1e-300);
  auto project = [p](Eigen::MatrixXcd W) {
    const double n2 = W.squaredNorm();
    if (n2 > p) W *= std::sqrt(p / n2);
    return W;
  };
  Eigen::MatrixXcd W = Eigen::MatrixXcd::Zero(Hbar.rows(), Hbar.cols());
  Eigen::MatrixXcd V = W;
  double t = 1.0;
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXcd grad = 2.0 * (Hbar - Ht * V);
    const Eigen::MatrixXcd next = project(V + grad / L);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    V = next + ((t - 1.0) / tn) * (next - W);
    W = next;
    t = tn;
  }
  return W;
}

inline double transmit_objective_direct(const Eigen::MatrixXcd& Ht, const Eigen::MatrixXcd& Hbar,
                                        const Eigen::MatrixXcd& W) {
  double v = 0.0;
  for (Eigen::Index k = 0; k < W.cols(); ++k) {
    v += 2.0 * std::real(Hbar.col(k).dot(W.col(k)));
    v -= std::real(W.col(k).dot(Ht * W.col(k)));
  }
  return v;
}

inline double receive_objective_direct(const Eigen::MatrixXcd& Hr, const Eigen::MatrixXcd& Hbar,
                                       const Eigen::VectorXcd& y, const Eigen::MatrixXcd& W) {
  double v = 0.0;
  for (Eigen::Index u = 0; u < W.cols(); ++u) {
    cd lin = 0.0;
    for (Eigen::Index n = 0; n < W.rows(); ++n) lin += std::conj(Hbar(n, u)) * W(n, u);
    v += 2.0 * std::real(std::conj(y(u)) * lin) - std::norm(y(u)) * std::real(W.col(u).dot(Hr * W.col(u)));
  }
  return v;
}

// Central-difference gradient of a real function of a complex matrix with
// respect to the real and imaginary parts of every entry.
template <class F>
double fd_gradient_norm(F&& f, Eigen::MatrixXcd W, double h) {
  double n2 = 0.0;
  for (Eigen::Index i = 0; i < W.size(); ++i) {
    for (cd dir : {cd(1.0, 0.0), cd(0.0, 1.0)}) {
      const cd orig = W(i);
      W(i) = orig + h * dir;
      const double fp = f(W);
      W(i) = orig - h * dir;
      const double fm = f(W);
      W(i) = orig;
      const double g = (fp - fm) / (2.0 * h);
      n2 += g * g;
    }
  }
  return std::sqrt(n2);
}

// Argmax of c1 sqrt(p) - c2 p on a uniform grid over [0, p_max].
inline double grid_power(double c1, double c2, double p_max, int points = 10000) {
  double best_p = 0.0, best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double p = p_max * i / (points - 1);
    const double v = c1 * std::sqrt(p) - c2 * p;
    if (v > best) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

// Distance from sp to the closest feasible node of a uniform grid over the
// square. Nodes are visited outward from sp so the scan can stop early; every
// node closer than the answer is still examined.
inline double grid_nearest_distance(const Vec2& sp, const FeasibleRegionSpec& spec, double step) {
  const int n = static_cast<int>(std::round(2.0 * spec.half_width / step));
  auto coord = [&](int i) { return -spec.half_width + 2.0 * spec.half_width * i / n; };
  auto nearest_index = [&](double v) {
    return std::clamp(static_cast<int>(std::round((v + spec.half_width) / (2.0 * spec.half_width) * n)), 0, n);
  };
  // Indices ordered by distance of their coordinate from v.
  auto outward = [&](double v) {
    std::vector<int> order;
    int lo = nearest_index(v), hi = lo + 1;
    while (lo >= 0 || hi <= n) {
      if (hi > n || (lo >= 0 && std::abs(coord(lo) - v) <= std::abs(coord(hi) - v))) order.push_back(lo--);
      else order.push_back(hi++);
    }
    return order;
  };
  const auto xs = outward(sp.x());
  const auto ys = outward(sp.y());
  const double r2 = spec.radius * spec.radius;
  double best2 = std::numeric_limits<double>::infinity();
  for (int i : xs) {
    const double x = coord(i);
    const double dx2 = (x - sp.x()) * (x - sp.x());
    if (dx2 >= best2) break;
    for (int j : ys) {
      const double y = coord(j);
      const double d2 = dx2 + (y - sp.y()) * (y - sp.y());
      if (d2 >= best2) break;
      bool ok = true;
      for (const auto& o : spec.obstacles)
        if ((x - o.x()) * (x - o.x()) + (y - o.y()) * (y - o.y()) < r2) {
          ok = false;
          break;
        }
      if (ok) best2 = d2;
    }
  }
  return std::sqrt(best2);
}

template <class F>
Vec2 fd_gradient_2d(F&& f, const Vec2& x, double h) {
  Vec2 g;
  for (int i = 0; i < 2; ++i) {
    Vec2 e = Vec2::Zero();
    e(i) = h;
    g(i) = (f(x + e) - f(x - e)) / (2.0 * h);
  }
  return g;
}

// Second differences at steps h and h/2 combined by Richardson
// extrapolation, leaving an O(h^4) truncation error.
template <class F>
Eigen::Matrix2d fd_hessian_2d(F&& f, const Vec2& x, double h) {
  const double f0 = f(x);
  auto second_differences = [&](double s) {
    Eigen::Matrix2d H;
    for (int i = 0; i < 2; ++i) {
      Vec2 ei = Vec2::Zero();
      ei(i) = s;
      H(i, i) = (f(x + ei) - 2.0 * f0 + f(x - ei)) / (s * s);
    }
    const Vec2 a(s, s), b(s, -s);
    H(0, 1) = H(1, 0) = (f(x + a) - f(x + b) - f(x - b) + f(x - a)) / (4.0 * s * s);
    return H;
  };
  return (4.0 * second_differences(0.5 * h) - second_differences(h)) / 3.0;
}

}  // namespace prafd::oracle
