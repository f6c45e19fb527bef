#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "prafd/ao_solver.hpp"
#include "prafd/baselines.hpp"
#include "prafd/channel.hpp"
#include "prafd/config.hpp"
#include "prafd/error.hpp"
#include "prafd/rng.hpp"

namespace prafd {

inline constexpr int kCsvSchemaVersion = 1;

inline const std::vector<std::string>& known_algorithms() {
  static const std::vector<std::string> a{"fp-bsum", "fp-bsum-simplified", "fp-gd", "fpas", "hd"};
  return a;
}

struct ExperimentSpec {
  ScenarioConfig base;
  std::string sweep_field;            // empty: a single point at the base config
  std::vector<double> sweep_values;
  std::vector<std::string> algorithms{"fp-bsum"};
  int trials = 200;
  std::string out_dir = "results";
  double theta_m = 0.0;               // angle error range (rad)
  double sigma_e2 = 0.0;              // normalised PRM error variance
  double duplex_factor = 0.5;
  bool simplified_geometry = false;
  unsigned threads = 0;               // 0: hardware concurrency
  int max_outer = 100;

  void validate() const {
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (algorithms.empty()) throw ConfigError("no algorithms selected");
    for (const auto& a : algorithms)
      if (std::find(known_algorithms().begin(), known_algorithms().end(), a) == known_algorithms().end())
        throw ConfigError("unknown algorithm '" + a + "'");
    if (!sweep_field.empty() && sweep_values.empty()) throw ConfigError("sweep '" + sweep_field + "' has no values");
    if (!(theta_m >= 0.0) || !(sigma_e2 >= 0.0)) throw ConfigError("perturbation magnitudes must be non-negative");
    if (!(duplex_factor >= 0.0 && duplex_factor <= 1.0)) throw ConfigError("duplex factor must lie in [0, 1]");
  }
};

// Applies a swept value. theta_m and sigma_e2 are experiment knobs; every
// other field is a scenario key.
inline void apply_sweep_value(const std::string& field, double v, ScenarioConfig& cfg, double& theta_m,
                              double& sigma_e2) {
  if (field == "theta_m") {
    theta_m = v;
    return;
  }
  if (field == "sigma_e2") {
    sigma_e2 = v;
    return;
  }
  std::ostringstream s;
  s.precision(17);
  s << v;
  if (!apply_config_key(cfg, field, s.str())) throw ConfigError("cannot sweep unknown field '" + field + "'");
}

inline void parse_sweep(const std::string& text, ExperimentSpec& spec) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw ConfigError("sweep must look like field=v1,v2,...");
  spec.sweep_field = detail::trim(text.substr(0, eq));
  spec.sweep_values.clear();
  for (const auto& v : detail::split(text.substr(eq + 1), ','))
    spec.sweep_values.push_back(detail::parse_double("sweep", v));
  if (spec.sweep_values.empty()) throw ConfigError("sweep '" + spec.sweep_field + "' has no values");
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

// Experiment file: scenario keys plus sweep, algos, trials, out, theta_m,
// sigma_e2, duplex_factor, simplified_geometry, threads, max_outer.
inline ExperimentSpec experiment_from_key_values(std::map<std::string, std::string> kv) {
  ExperimentSpec spec;
  auto take = [&](const char* key, auto&& apply) {
    if (auto it = kv.find(key); it != kv.end()) {
      apply(it->second);
      kv.erase(it);
    }
  };
  take("sweep", [&](const std::string& v) { parse_sweep(v, spec); });
  take("algos", [&](const std::string& v) { spec.algorithms = detail::split(v, ','); });
  take("trials", [&](const std::string& v) { spec.trials = detail::parse_int("trials", v); });
  take("out", [&](const std::string& v) { spec.out_dir = v; });
  take("theta_m", [&](const std::string& v) { spec.theta_m = detail::parse_double("theta_m", v); });
  take("sigma_e2", [&](const std::string& v) { spec.sigma_e2 = detail::parse_double("sigma_e2", v); });
  take("duplex_factor", [&](const std::string& v) { spec.duplex_factor = detail::parse_double("duplex_factor", v); });
  take("simplified_geometry", [&](const std::string& v) { spec.simplified_geometry = parse_bool("simplified_geometry", v); });
  take("threads", [&](const std::string& v) { spec.threads = static_cast<unsigned>(detail::parse_int("threads", v)); });
  take("max_outer", [&](const std::string& v) { spec.max_outer = detail::parse_int("max_outer", v); });
  spec.base = config_from_key_values(kv);
  spec.validate();
  return spec;
}

inline ExperimentSpec load_experiment(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment file '" + path + "'");
  return experiment_from_key_values(read_key_values(in));
}

// Additive U(-theta_m/2, theta_m/2) error on every angle, clipped to [0, pi].
inline ChannelRealization perturb_angles(const ChannelRealization& ch, double theta_m, Rng& rng) {
  if (!(theta_m >= 0.0)) throw DomainError("theta_m must be non-negative");
  ChannelRealization out = ch;
  if (theta_m == 0.0) return out;
  auto jitter = [&](PathAngles& p) {
    for (auto* list : {&p.theta, &p.phi})
      for (auto& a : *list) a = std::clamp(a + rng.uniform(-0.5 * theta_m, 0.5 * theta_m), 0.0, std::numbers::pi);
  };
  for (auto& p : out.geometry.dl) jitter(p);
  for (auto& p : out.geometry.ul) jitter(p);
  jitter(out.geometry.si_tx);
  jitter(out.geometry.si_rx);
  return out;
}

// Each path response h becomes h + |h| sigma_e g with g ~ CN(0, 1).
inline ChannelRealization perturb_prm(const ChannelRealization& ch, double sigma_e2, Rng& rng) {
  if (!(sigma_e2 >= 0.0)) throw DomainError("sigma_e2 must be non-negative");
  ChannelRealization out = ch;
  if (sigma_e2 == 0.0) return out;
  const double se = std::sqrt(sigma_e2);
  auto noisy = [&](cd h) { return h + std::abs(h) * se * rng.cscg(1.0); };
  for (auto& v : out.prm_dl) v = v.unaryExpr(noisy);
  for (auto& v : out.prm_ul) v = v.unaryExpr(noisy);
  for (Eigen::Index i = 0; i < out.prm_si.rows(); ++i)
    for (Eigen::Index j = 0; j < out.prm_si.cols(); ++j) out.prm_si(i, j) = noisy(out.prm_si(i, j));
  return out;
}

// One trial of one algorithm. The solver sees the perturbed CSI; rates are
// scored on the true realization.
inline TrialResult run_trial(const ScenarioConfig& cfg, const std::string& algorithm, std::uint64_t trial,
                             double theta_m, double sigma_e2, double duplex_factor, bool simplified, int max_outer) {
  const auto& known = known_algorithms();
  if (std::find(known.begin(), known.end(), algorithm) == known.end())
    throw ConfigError("unknown algorithm '" + algorithm + "'");
  const auto truth = sample_realization(cfg, trial);
  Rng prng(cfg.seed, trial, Stream::kPerturbation);
  ChannelRealization csi = perturb_angles(truth, theta_m, prng);
  csi = perturb_prm(csi, sigma_e2, prng);
  const bool mismatched = theta_m > 0.0 || sigma_e2 > 0.0;
  const ChannelRealization* eval = mismatched ? &truth : nullptr;

  AoOptions opts;
  opts.trial = trial;
  opts.max_outer = max_outer;
  opts.bsum.epsilon = cfg.epsilon_bsum;
  opts.bsum.simplified_geometry = simplified || algorithm == "fp-bsum-simplified";

  TrialResult r;
  if (algorithm == "fpas") {
    r = solve_fpas(cfg, csi, opts, eval);
  } else {
    const auto layout = initialize_layout(cfg, trial);
    if (algorithm == "hd") {
      r = solve_half_duplex(cfg, csi, layout, duplex_factor, opts, eval);
    } else {
      if (algorithm == "fp-gd") {
        GradientDescentOptions gd;
        gd.epsilon = cfg.epsilon_bsum;
        gd.simplified_geometry = simplified;
        opts.position_updater = gradient_descent_updater(gd);
      }
      r = alternating_optimize(cfg, csi, layout, opts, eval);
    }
  }
  r.algorithm = algorithm;
  r.trial = trial;
  return r;
}

struct AggregateRow {
  std::string algorithm;
  double sweep_value = 0.0;
  int n_ok = 0;
  int n_failed = 0;
  double mean = 0.0;
  double std = 0.0;
  double p05 = 0.0, p25 = 0.0, p50 = 0.0, p75 = 0.0, p95 = 0.0;
  double mean_outer_iterations = 0.0;
  double median_outer_iterations = 0.0;
  double mean_wall_time_s = 0.0;
};

struct ExperimentResult {
  std::string sweep_field;
  std::vector<TrialResult> trials;  // sweep value, then algorithm, then trial
  std::vector<AggregateRow> aggregates;
};

// Linear interpolation between closest ranks.
inline double percentile(std::vector<double> v, double q) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

inline AggregateRow aggregate(const std::string& algorithm, double sweep_value, const std::vector<const TrialResult*>& rows) {
  AggregateRow a;
  a.algorithm = algorithm;
  a.sweep_value = sweep_value;
  std::vector<double> rates, iters;
  double wall = 0.0;
  for (const auto* r : rows) {
    if (!r->ok) {
      ++a.n_failed;
      continue;
    }
    ++a.n_ok;
    rates.push_back(r->weighted_sum_rate);
    iters.push_back(r->outer_iterations);
    wall += r->wall_time_s;
  }
  if (a.n_ok == 0) {
    a.mean = a.std = a.p05 = a.p25 = a.p50 = a.p75 = a.p95 = std::nan("");
    a.mean_outer_iterations = a.median_outer_iterations = a.mean_wall_time_s = std::nan("");
    return a;
  }
  const double n = a.n_ok;
  for (double r : rates) a.mean += r;
  a.mean /= n;
  double ss = 0.0;
  for (double r : rates) ss += (r - a.mean) * (r - a.mean);
  a.std = a.n_ok > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  a.p05 = percentile(rates, 0.05);
  a.p25 = percentile(rates, 0.25);
  a.p50 = percentile(rates, 0.50);
  a.p75 = percentile(rates, 0.75);
  a.p95 = percentile(rates, 0.95);
  for (double i : iters) a.mean_outer_iterations += i;
  a.mean_outer_iterations /= n;
  a.median_outer_iterations = percentile(iters, 0.5);
  a.mean_wall_time_s = wall / n;
  return a;
}

// Runs every (sweep value, algorithm, trial) job on a worker pool and
// returns them in a fixed order.
inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  struct Job {
    ScenarioConfig cfg;
    std::string algorithm;
    double sweep_value;
    double theta_m;
    double sigma_e2;
    std::uint64_t trial;
  };
  std::vector<Job> jobs;
  std::vector<double> points = spec.sweep_field.empty() ? std::vector<double>{0.0} : spec.sweep_values;
  for (double v : points) {
    ScenarioConfig cfg = spec.base;
    double theta = spec.theta_m;
    double sigma = spec.sigma_e2;
    if (!spec.sweep_field.empty()) {
      apply_sweep_value(spec.sweep_field, v, cfg, theta, sigma);
      cfg.validate();
    }
    for (const auto& a : spec.algorithms)
      for (int t = 0; t < spec.trials; ++t) jobs.push_back({cfg, a, v, theta, sigma, static_cast<std::uint64_t>(t)});
  }

  ExperimentResult out;
  out.sweep_field = spec.sweep_field;
  out.trials.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const auto& j = jobs[i];
      TrialResult r;
      try {
        r = run_trial(j.cfg, j.algorithm, j.trial, j.theta_m, j.sigma_e2, spec.duplex_factor,
                      spec.simplified_geometry, spec.max_outer);
      } catch (const std::exception& e) {
        r.ok = false;
        r.diagnostic = e.what();
      }
      r.algorithm = j.algorithm;
      r.trial = j.trial;
      r.sweep_value = j.sweep_value;
      out.trials[i] = std::move(r);
    }
  };
  unsigned width = spec.threads ? spec.threads : std::max(1u, std::thread::hardware_concurrency());
  width = static_cast<unsigned>(std::min<std::size_t>(width, jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < width; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  for (double v : points)
    for (const auto& a : spec.algorithms) {
      std::vector<const TrialResult*> rows;
      for (const auto& r : out.trials)
        if (r.algorithm == a && r.sweep_value == v) rows.push_back(&r);
      out.aggregates.push_back(aggregate(a, v, rows));
    }
  return out;
}

// ---- CSV ----

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw InternalError("float formatting failed");
  return std::string(buf, end);
}

inline std::string join_doubles(const double* v, std::size_t n) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) s += ';';
    s += format_double(v[i]);
  }
  return s;
}

inline std::string join_points(const Points& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) s += ';';
    s += format_double(p[i].x()) + ' ' + format_double(p[i].y());
  }
  return s;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline const std::vector<std::string>& raw_csv_header() {
  static const std::vector<std::string> h{
      "schema_version", "algorithm",   "sweep_field",   "sweep_value",  "trial",       "status",
      "weighted_sum_rate", "dl_rates", "ul_rates",      "outer_iterations", "bsum_sweeps", "wall_time_s",
      "t_positions",    "r_positions", "rate_trace",    "evaluated_trace"};
  return h;
}

inline const std::vector<std::string>& aggregate_csv_header() {
  static const std::vector<std::string> h{
      "schema_version", "algorithm", "sweep_field", "sweep_value", "n_ok",  "n_failed",
      "mean",           "std",       "p05",         "p25",         "p50",   "p75",
      "p95",            "mean_outer_iterations",    "median_outer_iterations", "mean_wall_time_s"};
  return h;
}

inline std::string join_header(const std::vector<std::string>& h) {
  std::string s;
  for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + h[i];
  return s;
}

inline void write_raw_csv(const ExperimentResult& res, std::ostream& os) {
  os << join_header(raw_csv_header()) << '\n';
  for (const auto& r : res.trials) {
    const std::string status = r.ok ? "ok" : "failed: " + r.diagnostic;
    os << kCsvSchemaVersion << ',' << csv_field(r.algorithm) << ',' << csv_field(res.sweep_field) << ','
       << format_double(r.sweep_value) << ',' << r.trial << ',' << csv_field(status) << ','
       << format_double(r.weighted_sum_rate) << ',' << join_doubles(r.dl_rates.data(), r.dl_rates.size()) << ','
       << join_doubles(r.ul_rates.data(), r.ul_rates.size()) << ',' << r.outer_iterations << ',' << r.bsum_sweeps
       << ',' << format_double(r.wall_time_s) << ',' << join_points(r.layout.t) << ',' << join_points(r.layout.r)
       << ',' << join_doubles(r.trace.data(), r.trace.size()) << ','
       << join_doubles(r.evaluated_trace.data(), r.evaluated_trace.size()) << '\n';
  }
}

inline void write_aggregate_csv(const ExperimentResult& res, std::ostream& os) {
  os << join_header(aggregate_csv_header()) << '\n';
  for (const auto& a : res.aggregates) {
    os << kCsvSchemaVersion << ',' << csv_field(a.algorithm) << ',' << csv_field(res.sweep_field) << ','
       << format_double(a.sweep_value) << ',' << a.n_ok << ',' << a.n_failed << ',' << format_double(a.mean) << ','
       << format_double(a.std) << ',' << format_double(a.p05) << ',' << format_double(a.p25) << ','
       << format_double(a.p50) << ',' << format_double(a.p75) << ',' << format_double(a.p95) << ','
       << format_double(a.mean_outer_iterations) << ',' << format_double(a.median_outer_iterations) << ','
       << format_double(a.mean_wall_time_s) << '\n';
  }
}

struct CsvPaths {
  std::filesystem::path raw;
  std::filesystem::path aggregate;
};

// Writes raw.csv and aggregate.csv into `dir`, creating it if needed.
inline CsvPaths emit_csv(const ExperimentResult& res, const std::filesystem::path& dir) {
  if (res.trials.empty()) throw DomainError("no results to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  CsvPaths p{dir / "raw.csv", dir / "aggregate.csv"};
  auto write = [](const std::filesystem::path& path, auto&& fn) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    fn(os);
    os.flush();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
  };
  write(p.raw, [&](std::ostream& os) { write_raw_csv(res, os); });
  write(p.aggregate, [&](std::ostream& os) { write_aggregate_csv(res, os); });
  return p;
}

}  // namespace prafd
