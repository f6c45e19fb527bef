#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "prafd/error.hpp"

namespace prafd {

inline constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

// Which path count normalises the SI path-response variance.
enum class SiVarianceNorm { kSiPaths, kUserPaths };

// Scenario parameters. Everything is linear SI units internally (W, m, Hz).
struct ScenarioConfig {
  int K_D = 4;
  int K_U = 4;
  int N_t = 4;
  int N_r = 4;
  double A = 4.0;         // region side in wavelengths
  double D_min = -1.0;    // metres; negative means lambda / 2
  int L = 8;
  int L_SI = 6;
  double rho_0 = 1e-4;    // -40 dB
  double alpha = 2.8;
  double rho_SI = 1e-9;   // -90 dB
  double rho_IUI = 1e-9;  // -90 dB
  double sigma2 = 1e-12;  // -90 dBm
  double p_D_max = 10.0;  // 40 dBm
  double p_U_max = 0.01;  // 10 dBm
  double f_c = 30e9;
  std::vector<double> weights;  // empty means equal weights
  double epsilon = 1e-3;
  double epsilon_bsum = 1e-3;
  std::uint64_t seed = 1;
  double d_min_m = 20.0;  // user distance range
  double d_max_m = 100.0;
  SiVarianceNorm si_variance_norm = SiVarianceNorm::kSiPaths;

  double lambda() const { return kSpeedOfLight / f_c; }
  double half_width() const { return 0.5 * A * lambda(); }
  double min_distance() const { return D_min > 0.0 ? D_min : 0.5 * lambda(); }
  int num_users() const { return K_D + K_U; }

  // Weight of user i in the concatenated [DL..., UL...] ordering.
  double weight(int i) const {
    if (weights.empty()) return 1.0 / static_cast<double>(num_users());
    return weights.at(static_cast<std::size_t>(i));
  }

  std::vector<double> resolved_weights() const {
    std::vector<double> w(static_cast<std::size_t>(num_users()));
    for (int i = 0; i < num_users(); ++i) w[static_cast<std::size_t>(i)] = weight(i);
    return w;
  }

  // True when N discs of radius D_min/2 cannot possibly fit in the
  // region grown by D_min/2 on every side (necessary packing condition).
  bool packing_impossible(int n) const {
    const double r = 0.5 * min_distance();
    const double side = A * lambda() + min_distance();
    return n * std::numbers::pi * r * r > side * side;
  }

  void validate() const {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    if (K_D < 0 || K_U < 0 || K_D + K_U < 1) fail("user counts must be non-negative with at least one user");
    if (N_t < 1 || N_r < 1) fail("antenna counts must be positive");
    if (L < 1 || L_SI < 1) fail("path counts must be positive");
    if (!(A > 0.0) || !(f_c > 0.0)) fail("region size and carrier frequency must be positive");
    if (!(rho_0 > 0.0) || !(rho_SI > 0.0) || !(rho_IUI > 0.0) || !(sigma2 > 0.0))
      fail("path-loss, SI, IUI coefficients and noise power must be positive");
    if (!(p_D_max > 0.0) || !(p_U_max > 0.0)) fail("power budgets must be positive");
    if (!(alpha > 0.0)) fail("path-loss exponent must be positive");
    if (!(epsilon > 0.0) || !(epsilon_bsum > 0.0)) fail("convergence thresholds must be positive");
    if (!(d_min_m > 0.0) || !(d_max_m >= d_min_m)) fail("user distance range invalid");
    const double dmin = min_distance();
    if (!(dmin > 0.0)) fail("D_min must be positive");
    if (!(A * lambda() > dmin)) fail("region side A*lambda must exceed D_min");
    if (packing_impossible(N_t) || packing_impossible(N_r))
      fail("region cannot hold the requested antennas at D_min spacing");
    if (!weights.empty()) {
      if (static_cast<int>(weights.size()) != num_users()) fail("weights must have K_D + K_U entries");
      double s = 0.0;
      for (double w : weights) {
        if (!(w >= 0.0)) fail("weights must be non-negative");
        s += w;
      }
      if (std::abs(s - 1.0) > 1e-12) fail("weights must sum to 1");
    }
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': not a number: '" + v + "'");
  }
  if (trim(v.substr(pos)).size() != 0) throw ConfigError("key '" + key + "': trailing garbage in '" + v + "'");
  return out;
}

inline int parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (d != std::floor(d)) throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  const auto t = trim(v);
  std::uint64_t out = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (ec != std::errc() || end != t.data() + t.size() || t.empty())
    throw ConfigError("key '" + key + "': expected an unsigned integer, got '" + v + "'");
  return out;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    auto t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

}  // namespace detail

// Reads "key = value" lines ('#' starts a comment) into a flat map. Later
// keys override earlier ones.
inline std::map<std::string, std::string> read_key_values(std::istream& in) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    auto t = detail::trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    kv[detail::trim(t.substr(0, eq))] = detail::trim(t.substr(eq + 1));
  }
  return kv;
}

// Applies one key to the config. Returns false if the key is not a
// scenario key (callers may handle it). dB inputs use _db / _dbm suffixes.
inline bool apply_config_key(ScenarioConfig& c, const std::string& key, const std::string& v) {
  using detail::parse_double;
  using detail::parse_int;
  if (key == "K_D") c.K_D = parse_int(key, v);
  else if (key == "K_U") c.K_U = parse_int(key, v);
  else if (key == "K") c.K_D = c.K_U = parse_int(key, v);
  else if (key == "N_t") c.N_t = parse_int(key, v);
  else if (key == "N_r") c.N_r = parse_int(key, v);
  else if (key == "N") c.N_t = c.N_r = parse_int(key, v);
  else if (key == "A") c.A = parse_double(key, v);
  else if (key == "D_min") c.D_min = parse_double(key, v);
  else if (key == "D_min_lambda") c.D_min = parse_double(key, v) * c.lambda();
  else if (key == "L") c.L = parse_int(key, v);
  else if (key == "L_SI") c.L_SI = parse_int(key, v);
  else if (key == "rho_0") c.rho_0 = parse_double(key, v);
  else if (key == "rho_0_db") c.rho_0 = db_to_linear(parse_double(key, v));
  else if (key == "alpha") c.alpha = parse_double(key, v);
  else if (key == "rho_SI") c.rho_SI = parse_double(key, v);
  else if (key == "rho_SI_db") c.rho_SI = db_to_linear(parse_double(key, v));
  else if (key == "rho_IUI") c.rho_IUI = parse_double(key, v);
  else if (key == "rho_IUI_db") c.rho_IUI = db_to_linear(parse_double(key, v));
  else if (key == "sigma2") c.sigma2 = parse_double(key, v);
  else if (key == "sigma2_dbm") c.sigma2 = dbm_to_watts(parse_double(key, v));
  else if (key == "p_D_max") c.p_D_max = parse_double(key, v);
  else if (key == "p_D_max_dbm") c.p_D_max = dbm_to_watts(parse_double(key, v));
  else if (key == "p_U_max") c.p_U_max = parse_double(key, v);
  else if (key == "p_U_max_dbm") c.p_U_max = dbm_to_watts(parse_double(key, v));
  else if (key == "f_c") c.f_c = parse_double(key, v);
  else if (key == "lambda") c.f_c = kSpeedOfLight / parse_double(key, v);
  else if (key == "epsilon") c.epsilon = parse_double(key, v);
  else if (key == "epsilon_bsum") c.epsilon_bsum = parse_double(key, v);
  else if (key == "seed") c.seed = detail::parse_u64(key, v);
  else if (key == "d_min_m") c.d_min_m = parse_double(key, v);
  else if (key == "d_max_m") c.d_max_m = parse_double(key, v);
  else if (key == "si_variance_paths") {
    if (v == "L_SI") c.si_variance_norm = SiVarianceNorm::kSiPaths;
    else if (v == "L") c.si_variance_norm = SiVarianceNorm::kUserPaths;
    else throw ConfigError("si_variance_paths must be L_SI or L");
  } else if (key == "weights") {
    c.weights.clear();
    for (const auto& w : detail::split(v, ',')) c.weights.push_back(parse_double(key, w));
  } else {
    return false;
  }
  return true;
}

inline ScenarioConfig config_from_key_values(const std::map<std::string, std::string>& kv, bool strict = true) {
  ScenarioConfig c;
  // f_c / lambda first so D_min_lambda sees the right wavelength.
  for (const char* k : {"f_c", "lambda"})
    if (auto it = kv.find(k); it != kv.end()) apply_config_key(c, it->first, it->second);
  for (const auto& [k, v] : kv) {
    if (!apply_config_key(c, k, v) && strict) throw ConfigError("unknown config key '" + k + "'");
  }
  c.validate();
  return c;
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  return config_from_key_values(read_key_values(in));
}

}  // namespace prafd
