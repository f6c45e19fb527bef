#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "prafd/config.hpp"
#include "prafd/error.hpp"
#include "prafd/rng.hpp"

namespace prafd {

using cd = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using Points = std::vector<Vec2>;

// Elevation / azimuth pairs of one channel's resolvable paths.
struct PathAngles {
  std::vector<double> theta;
  std::vector<double> phi;

  std::size_t size() const { return theta.size(); }
};

struct PathGeometry {
  std::vector<PathAngles> dl;  // one entry per DL user (transmit side AoDs)
  std::vector<PathAngles> ul;  // one entry per UL user (receive side AoAs)
  PathAngles si_tx;            // SI departure angles at the transmit region
  PathAngles si_rx;            // SI arrival angles at the receive region
  std::vector<double> dl_distance;
  std::vector<double> ul_distance;
};

// One channel draw: geometry plus path responses. User path responses are
// diagonal and stored as their diagonal; the SI response is a full matrix
// with rows indexed by receive-side paths and columns by transmit-side paths.
struct ChannelRealization {
  double lambda = 0.01;
  PathGeometry geometry;
  std::vector<Eigen::VectorXcd> prm_dl;
  std::vector<Eigen::VectorXcd> prm_ul;
  Eigen::MatrixXcd prm_si;
  Eigen::MatrixXcd iui;  // K_D x K_U

  int num_dl() const { return static_cast<int>(prm_dl.size()); }
  int num_ul() const { return static_cast<int>(prm_ul.size()); }
};

struct AntennaLayout {
  Points t;  // transmit PRA coordinates (m), origin at region centre
  Points r;  // receive PRA coordinates (m)
};

inline void check_angle(double a, const char* what) {
  if (!(a >= 0.0 && a <= std::numbers::pi)) throw DomainError(std::string(what) + " outside [0, pi]: " + std::to_string(a));
}

// Normalised projection of a path direction onto the antenna plane.
inline Vec2 wave_vector(double theta, double phi) {
  check_angle(theta, "elevation");
  check_angle(phi, "azimuth");
  return {std::sin(theta) * std::cos(phi), std::cos(theta)};
}

inline std::vector<Vec2> wave_vectors(const PathAngles& p) {
  if (p.theta.size() != p.phi.size()) throw DomainError("theta/phi lists differ in length");
  std::vector<Vec2> out;
  out.reserve(p.size());
  for (std::size_t l = 0; l < p.size(); ++l) out.push_back(wave_vector(p.theta[l], p.phi[l]));
  return out;
}

inline double wavenumber(double lambda) { return 2.0 * std::numbers::pi / lambda; }

// Element l is exp(j 2pi/lambda <n_l, position>).
inline Eigen::VectorXcd field_response_vector(const Vec2& position, const PathAngles& angles, double lambda) {
  if (angles.size() == 0) throw DomainError("field response needs at least one path");
  const auto n = wave_vectors(angles);
  const double k = wavenumber(lambda);
  Eigen::VectorXcd g(static_cast<Eigen::Index>(n.size()));
  for (std::size_t l = 0; l < n.size(); ++l) g(static_cast<Eigen::Index>(l)) = std::polar(1.0, k * n[l].dot(position));
  return g;
}

// Field response matrix: column n is the field response of antenna n.
inline Eigen::MatrixXcd field_response_matrix(std::span<const Vec2> positions, const PathAngles& angles, double lambda) {
  if (angles.size() == 0) throw DomainError("field response needs at least one path");
  const auto n = wave_vectors(angles);
  const double k = wavenumber(lambda);
  Eigen::MatrixXcd G(static_cast<Eigen::Index>(n.size()), static_cast<Eigen::Index>(positions.size()));
  for (std::size_t a = 0; a < positions.size(); ++a)
    for (std::size_t l = 0; l < n.size(); ++l)
      G(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(a)) = std::polar(1.0, k * n[l].dot(positions[a]));
  return G;
}

namespace detail {

inline Eigen::MatrixXcd user_channels(std::span<const Vec2> positions, const std::vector<PathAngles>& paths,
                                      const std::vector<Eigen::VectorXcd>& prm, double lambda) {
  if (paths.size() != prm.size()) throw DomainError("path-angle and path-response lists differ in user count");
  Eigen::MatrixXcd H(static_cast<Eigen::Index>(positions.size()), static_cast<Eigen::Index>(prm.size()));
  for (std::size_t k = 0; k < prm.size(); ++k) {
    if (static_cast<std::size_t>(prm[k].size()) != paths[k].size())
      throw DomainError("path response of user " + std::to_string(k) + " does not match its path count");
    // G^H * Sigma * 1: conjugated field responses weighted by the diagonal.
    H.col(static_cast<Eigen::Index>(k)) = field_response_matrix(positions, paths[k], lambda).adjoint() * prm[k];
  }
  return H;
}

}  // namespace detail

// N_t x K_D; column k is G_k(t)^H Sigma_k 1.
inline Eigen::MatrixXcd build_downlink_channel(std::span<const Vec2> t_positions, const ChannelRealization& ch) {
  return detail::user_channels(t_positions, ch.geometry.dl, ch.prm_dl, ch.lambda);
}

// N_r x K_U; column k is F_k(r)^H Sigma_k 1.
inline Eigen::MatrixXcd build_uplink_channel(std::span<const Vec2> r_positions, const ChannelRealization& ch) {
  return detail::user_channels(r_positions, ch.geometry.ul, ch.prm_ul, ch.lambda);
}

// N_r x N_t; F_SI(r)^H Sigma_SI G_SI(t).
inline Eigen::MatrixXcd build_si_channel(std::span<const Vec2> t_positions, std::span<const Vec2> r_positions,
                                         const ChannelRealization& ch) {
  const auto& g = ch.geometry;
  if (static_cast<std::size_t>(ch.prm_si.rows()) != g.si_rx.size() ||
      static_cast<std::size_t>(ch.prm_si.cols()) != g.si_tx.size())
    throw DomainError("SI path response dimensions do not match SI path counts");
  const auto F = field_response_matrix(r_positions, g.si_rx, ch.lambda);
  const auto G = field_response_matrix(t_positions, g.si_tx, ch.lambda);
  return F.adjoint() * ch.prm_si * G;
}

inline double user_path_variance(const ScenarioConfig& c, double distance) {
  return c.rho_0 * std::pow(distance, -c.alpha) / static_cast<double>(c.L);
}

inline double si_path_variance(const ScenarioConfig& c) {
  const int paths = c.si_variance_norm == SiVarianceNorm::kSiPaths ? c.L_SI : c.L;
  return c.rho_SI / static_cast<double>(paths);
}

inline PathAngles sample_angles(Rng& rng, int count) {
  PathAngles p;
  p.theta.resize(static_cast<std::size_t>(count));
  p.phi.resize(static_cast<std::size_t>(count));
  for (auto& t : p.theta) t = rng.uniform(0.0, std::numbers::pi);
  for (auto& f : p.phi) f = rng.uniform(0.0, std::numbers::pi);
  return p;
}

inline ChannelRealization sample_realization(const ScenarioConfig& c, Rng& rng) {
  ChannelRealization ch;
  ch.lambda = c.lambda();
  auto& g = ch.geometry;
  auto user = [&](std::vector<PathAngles>& paths, std::vector<double>& dist, std::vector<Eigen::VectorXcd>& prm,
                  int count) {
    for (int k = 0; k < count; ++k) {
      const double d = rng.uniform(c.d_min_m, c.d_max_m);
      dist.push_back(d);
      paths.push_back(sample_angles(rng, c.L));
      Eigen::VectorXcd s(c.L);
      const double var = user_path_variance(c, d);
      for (int l = 0; l < c.L; ++l) s(l) = rng.cscg(var);
      prm.push_back(std::move(s));
    }
  };
  user(g.dl, g.dl_distance, ch.prm_dl, c.K_D);
  user(g.ul, g.ul_distance, ch.prm_ul, c.K_U);
  g.si_tx = sample_angles(rng, c.L_SI);
  g.si_rx = sample_angles(rng, c.L_SI);
  ch.prm_si.resize(c.L_SI, c.L_SI);
  const double si_var = si_path_variance(c);
  for (int i = 0; i < c.L_SI; ++i)
    for (int j = 0; j < c.L_SI; ++j) ch.prm_si(i, j) = rng.cscg(si_var);
  ch.iui.resize(c.K_D, c.K_U);
  for (int i = 0; i < c.K_D; ++i)
    for (int j = 0; j < c.K_U; ++j) ch.iui(i, j) = rng.cscg(c.rho_IUI);
  return ch;
}

// Realization for trial `trial` of the config's master seed.
inline ChannelRealization sample_realization(const ScenarioConfig& c, std::uint64_t trial) {
  Rng rng(c.seed, trial, Stream::kRealization);
  return sample_realization(c, rng);
}

// Feasibility slack used for every geometric constraint check.
inline double feasibility_slack(double d_min) { return 1e-9 * d_min; }

inline bool side_feasible(std::span<const Vec2> pts, double half_width, double d_min) {
  const double tol = feasibility_slack(d_min);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(pts[i].x()) > half_width + tol || std::abs(pts[i].y()) > half_width + tol) return false;
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      if ((pts[i] - pts[j]).norm() < d_min - tol) return false;
  }
  return true;
}

inline bool layout_feasible(const AntennaLayout& layout, const ScenarioConfig& c) {
  return side_feasible(layout.t, c.half_width(), c.min_distance()) &&
         side_feasible(layout.r, c.half_width(), c.min_distance());
}

}  // namespace prafd
