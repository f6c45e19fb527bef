#include <CLI11.hpp>

#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <vector>
#include <string>

#include "prafd/prafd.hpp"
#include "suites.hpp"

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string sweep;
  std::string algos;
  std::string out;
  std::optional<bool> simplified;
  std::optional<double> duplex;
  std::optional<unsigned> threads;
};

void add_common(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config, "key = value file (scenario and experiment keys)")->check(CLI::ExistingFile);
  app->add_option("--seed", o.seed, "master seed");
  app->add_option("--simplified-geometry", o.simplified, "use the simplified nearest-point search (true/false)");
  app->add_option("--duplex-factor", o.duplex, "DL time fraction of the half-duplex baseline");
}

prafd::ExperimentSpec build_spec(const Overrides& o) {
  prafd::ExperimentSpec spec = o.config.empty() ? prafd::ExperimentSpec{} : prafd::load_experiment(o.config);
  if (o.seed) spec.base.seed = *o.seed;
  if (o.trials) spec.trials = *o.trials;
  if (!o.sweep.empty()) prafd::parse_sweep(o.sweep, spec);
  if (!o.algos.empty()) spec.algorithms = prafd::detail::split(o.algos, ',');
  if (!o.out.empty()) spec.out_dir = o.out;
  if (o.simplified) spec.simplified_geometry = *o.simplified;
  if (o.duplex) spec.duplex_factor = *o.duplex;
  if (o.threads) spec.threads = *o.threads;
  spec.base.validate();
  spec.validate();
  return spec;
}

std::string points(const prafd::Points& p) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < p.size(); ++i) s << (i ? " " : "") << '(' << p[i].x() << ", " << p[i].y() << ')';
  return s.str();
}

int run_solve(const Overrides& o, const std::string& algo, std::uint64_t trial) {
  const auto spec = build_spec(o);
  const auto r = prafd::run_trial(spec.base, algo, trial, spec.theta_m, spec.sigma_e2, spec.duplex_factor,
                                  spec.simplified_geometry, spec.max_outer);
  std::cout << "algorithm " << algo << ", seed " << spec.base.seed << ", trial " << trial << '\n';
  std::cout << "iteration,weighted_sum_rate,evaluated_rate\n";
  for (std::size_t i = 0; i < r.trace.size(); ++i)
    std::cout << i << ',' << prafd::format_double(r.trace[i]) << ','
              << prafd::format_double(i < r.evaluated_trace.size() ? r.evaluated_trace[i] : r.trace[i]) << '\n';
  if (!r.ok) {
    std::cerr << "error: trial failed: " << r.diagnostic << '\n';
    return 3;
  }
  std::cout << "final weighted sum-rate " << prafd::format_double(r.weighted_sum_rate) << " bit/s/Hz after "
            << r.outer_iterations << " outer iterations (" << r.bsum_sweeps << " placement sweeps)\n";
  std::cout << "DL rates " << r.dl_rates.transpose() << "\nUL rates " << r.ul_rates.transpose() << '\n';
  std::cout << "transmit positions (m) " << points(r.layout.t) << "\nreceive positions (m) " << points(r.layout.r)
            << '\n';
  return 0;
}

int run_experiment_cmd(const Overrides& o) {
  const auto spec = build_spec(o);
  const auto res = prafd::run_experiment(spec);
  const auto paths = prafd::emit_csv(res, spec.out_dir);
  std::cout << std::left << std::setw(20) << "algorithm" << std::setw(14) << (spec.sweep_field.empty() ? "-" : spec.sweep_field)
            << std::setw(8) << "ok" << std::setw(8) << "failed" << std::setw(14) << "mean" << "median iters\n";
  int failed = 0;
  for (const auto& a : res.aggregates) {
    failed += a.n_failed;
    std::cout << std::setw(20) << a.algorithm << std::setw(14) << a.sweep_value << std::setw(8) << a.n_ok
              << std::setw(8) << a.n_failed << std::setw(14) << a.mean << a.median_outer_iterations << '\n';
  }
  std::cout << "wrote " << paths.raw.string() << " and " << paths.aggregate.string() << '\n';
  if (failed > 0) std::cerr << "warning: " << failed << " trials failed; see the status column of raw.csv\n";
  return 0;
}

int run_oracle(bool all, const std::vector<int>& only) {
  using namespace prafd::verify;
  std::vector<Suite> suites;
  if (all || !only.empty()) {
    suites.push_back({1, "monotone AO", [] { return monotone_and_sandwich()[0]; }});
    suites.push_back({2, "FP sandwich", [] { return monotone_and_sandwich()[1]; }});
  }
  for (auto& s : oracle_suites()) suites.push_back(s);
  if (all || !only.empty()) {
    suites.push_back({9, "paired comparisons", [] { return paired_comparisons(); }});
    suites.push_back({10, "region-size saturation", [] { return region_saturation(); }});
    suites.push_back({11, "convergence speed", [] { return convergence_speed(); }});
    suites.push_back({12, "robustness direction", [] { return robustness(); }});
    suites.push_back({13, "determinism", [] {
                        const auto dir = std::filesystem::temp_directory_path() / "prafd-oracle-determinism";
                        auto v = determinism(dir);
                        std::filesystem::remove_all(dir);
                        return v;
                      }});
  }
  const std::set<int> wanted(only.begin(), only.end());
  int failures = 0;
  for (const auto& s : suites) {
    if (!wanted.empty() && !wanted.count(s.id)) continue;
    const auto v = s.run();
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << v.id << "] " << v.name << ": " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex MIMO with position-reconfigurable antennas: solver and experiment harness"};
  app.require_subcommand(1);

  Overrides solve_o, exp_o;
  std::string algo = "fp-bsum";
  std::uint64_t trial = 0;
  auto* solve = app.add_subcommand("solve", "solve one trial and print the rate trace");
  add_common(solve, solve_o);
  solve->add_option("--algo", algo, "fp-bsum | fp-bsum-simplified | fp-gd | fpas | hd");
  solve->add_option("--trial", trial, "trial index (selects the channel realization)");

  auto* experiment = app.add_subcommand("experiment", "run an experiment and write raw.csv and aggregate.csv");
  add_common(experiment, exp_o);
  experiment->add_option("--trials", exp_o.trials, "trials per sweep point and algorithm");
  experiment->add_option("--sweep", exp_o.sweep, "field=v1,v2,... (N, A, p_D_max, L, rho_SI, theta_m, sigma_e2, ...)");
  experiment->add_option("--algos", exp_o.algos, "comma-separated algorithm list");
  experiment->add_option("--out", exp_o.out, "output directory");
  experiment->add_option("--threads", exp_o.threads, "worker threads (0: all cores)");

  bool all = false;
  std::vector<int> only;
  auto* oracle = app.add_subcommand("oracle", "run the brute-force verification suites");
  oracle->add_flag("--all", all, "also run the solver-level acceptance experiments");
  oracle->add_option("--only", only, "run only these criterion ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*solve) return run_solve(solve_o, algo, trial);
    if (*experiment) return run_experiment_cmd(exp_o);
    if (*oracle) return run_oracle(all, only);
  } catch (const prafd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
