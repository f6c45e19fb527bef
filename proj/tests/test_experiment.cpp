#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "prafd/experiment.hpp"
#include "suites.hpp"

using namespace prafd;
namespace fs = std::filesystem;

namespace {

ExperimentSpec tiny_spec(int trials) {
  ExperimentSpec s;
  s.base.K_D = s.base.K_U = 1;
  s.base.N_t = s.base.N_r = 2;
  s.trials = trials;
  s.threads = 1;
  s.max_outer = 20;
  return s;
}

std::vector<std::string> lines_of(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> cells(const std::string& line) { return detail::split(line, ','); }

class ScratchDir : public ::testing::Test {
 protected:
  fs::path dir = fs::temp_directory_path() /
                 ("prafd-test-" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
  void TearDown() override { fs::remove_all(dir); }
};

}  // namespace

TEST(Perturbation, ZeroMagnitudeIsIdentity) {
  const ScenarioConfig c;
  const auto ch = sample_realization(c, 0);
  Rng rng(1);
  const auto a = perturb_angles(ch, 0.0, rng);
  const auto p = perturb_prm(ch, 0.0, rng);
  EXPECT_EQ(a.geometry.dl[0].theta, ch.geometry.dl[0].theta);
  EXPECT_EQ(p.prm_dl[0], ch.prm_dl[0]);
  EXPECT_EQ(p.prm_si, ch.prm_si);
}

TEST(Perturbation, AngleErrorStaysInRange) {
  ScenarioConfig c;
  c.L = 1000;
  const auto ch = sample_realization(c, 0);
  Rng rng(2);
  const double theta_m = 0.2;
  double lo = 0.0, hi = 0.0;
  for (int rep = 0; rep < 25; ++rep) {
    const auto p = perturb_angles(ch, theta_m, rng);
    for (std::size_t k = 0; k < ch.geometry.dl.size(); ++k)
      for (std::size_t l = 0; l < ch.geometry.dl[k].theta.size(); ++l) {
        const double orig = ch.geometry.dl[k].theta[l];
        const double moved = p.geometry.dl[k].theta[l];
        EXPECT_GE(moved, 0.0);
        EXPECT_LE(moved, std::numbers::pi);
        if (orig > theta_m && orig < std::numbers::pi - theta_m) {
          lo = std::min(lo, moved - orig);
          hi = std::max(hi, moved - orig);
        }
      }
  }
  EXPECT_GE(lo, -0.5 * theta_m);
  EXPECT_LE(hi, 0.5 * theta_m);
  EXPECT_LT(lo, -0.49 * theta_m);
  EXPECT_GT(hi, 0.49 * theta_m);
}

TEST(Perturbation, ResponseErrorHasRequestedRelativeVariance) {
  ScenarioConfig c;
  c.L = 25000;
  const auto ch = sample_realization(c, 0);
  Rng rng(3);
  const double se2 = 0.1;
  const auto p = perturb_prm(ch, se2, rng);
  double acc = 0.0;
  int n = 0;
  for (std::size_t k = 0; k < ch.prm_dl.size(); ++k)
    for (Eigen::Index l = 0; l < ch.prm_dl[k].size(); ++l) {
      acc += std::norm(p.prm_dl[k](l) - ch.prm_dl[k](l)) / std::norm(ch.prm_dl[k](l));
      ++n;
    }
  EXPECT_GE(n, 100000);
  EXPECT_NEAR(acc / n, se2, 0.05 * se2);
}

TEST(Trial, MismatchedCsiIsScoredOnTheTruth) {
  const auto s = tiny_spec(1);
  const auto r = run_trial(s.base, "fp-bsum", 0, 0.3, 0.0, 0.5, false, 20);
  ASSERT_TRUE(r.ok);
  const auto truth = sample_realization(s.base, 0);
  const double expect = weighted_sum_rate(r.state, build_channels(r.layout, truth), s.base);
  EXPECT_NEAR(r.weighted_sum_rate, expect, 1e-12 * expect);
  EXPECT_NEAR(r.evaluated_trace.back(), expect, 1e-9 * expect);
}

TEST(Trial, UnknownAlgorithmIsAConfigError) {
  EXPECT_THROW(run_trial(ScenarioConfig{}, "simulated-annealing", 0, 0.0, 0.0, 0.5, false, 10), ConfigError);
}

TEST(Sweep, ParsesFieldAndValues) {
  ExperimentSpec s;
  parse_sweep("A = 1, 2.5,4", s);
  EXPECT_EQ(s.sweep_field, "A");
  EXPECT_EQ(s.sweep_values, (std::vector<double>{1.0, 2.5, 4.0}));
  EXPECT_THROW(parse_sweep("A", s), ConfigError);
  EXPECT_THROW(parse_sweep("A=", s), ConfigError);
  EXPECT_THROW(parse_sweep("A=1,x", s), ConfigError);
}

TEST(Sweep, ExperimentKeysAreSeparatedFromScenarioKeys) {
  std::istringstream in("K = 1\nN = 2\ntrials = 3\nalgos = fpas,hd\nsweep = theta_m=0,0.1\nthreads = 2\n");
  const auto s = experiment_from_key_values(read_key_values(in));
  EXPECT_EQ(s.base.K_D, 1);
  EXPECT_EQ(s.trials, 3);
  EXPECT_EQ(s.algorithms, (std::vector<std::string>{"fpas", "hd"}));
  EXPECT_EQ(s.sweep_field, "theta_m");
  std::istringstream bad("algos = fp-bsum,nope\n");
  EXPECT_THROW(experiment_from_key_values(read_key_values(bad)), ConfigError);
}

TEST(Aggregation, PercentilesInterpolate) {
  EXPECT_DOUBLE_EQ(percentile({1.0, 2.0, 3.0, 4.0}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile({5.0}, 0.95), 5.0);
  EXPECT_TRUE(std::isnan(percentile({}, 0.5)));
}

TEST(Aggregation, FailedTrialsAreCountedNotAveraged) {
  TrialResult ok, bad;
  ok.weighted_sum_rate = 2.0;
  ok.outer_iterations = 4;
  bad.ok = false;
  bad.weighted_sum_rate = 100.0;
  const auto a = aggregate("fp-bsum", 0.0, {&ok, &bad});
  EXPECT_EQ(a.n_ok, 1);
  EXPECT_EQ(a.n_failed, 1);
  EXPECT_EQ(a.mean, 2.0);
  EXPECT_EQ(a.std, 0.0);
}

TEST(Csv, ShortestRoundTripFloats) {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.0}) {
    const auto s = format_double(v);
    EXPECT_EQ(std::stod(s), v) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST_F(ScratchDir, HeadersRowsAndAggregatesRoundTrip) {
  auto s = tiny_spec(3);
  s.algorithms = {"fp-bsum", "fpas"};
  parse_sweep("p_D_max=1,10", s);
  const auto res = run_experiment(s);
  const auto paths = emit_csv(res, dir);
  const auto raw = lines_of(paths.raw);
  const auto agg = lines_of(paths.aggregate);
  ASSERT_EQ(raw.size(), 1u + 2 * 2 * 3);
  ASSERT_EQ(agg.size(), 1u + 2 * 2);
  EXPECT_EQ(cells(raw[0]), raw_csv_header());
  EXPECT_EQ(cells(agg[0]), aggregate_csv_header());
  for (std::size_t i = 1; i < raw.size(); ++i) EXPECT_EQ(cells(raw[i]).size(), raw_csv_header().size());
  for (std::size_t i = 1; i < agg.size(); ++i) {
    const auto c = cells(agg[i]);
    const auto& a = res.aggregates[i - 1];
    EXPECT_EQ(c[0], "1");
    EXPECT_EQ(c[1], a.algorithm);
    EXPECT_EQ(c[2], "p_D_max");
    EXPECT_EQ(std::stod(c[3]), a.sweep_value);
    EXPECT_EQ(std::stod(c[6]), a.mean);
    EXPECT_EQ(std::stod(c[10]), a.p50);
  }
  // Mean recomputed from the raw rows matches the aggregate bit for bit.
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = 1; i < raw.size(); ++i) {
    const auto c = cells(raw[i]);
    if (c[1] == "fpas" && c[3] == "10") {
      sum += std::stod(c[6]);
      ++n;
    }
  }
  ASSERT_EQ(n, 3);
  EXPECT_EQ(sum / n, res.aggregates[3].mean);
}

TEST_F(ScratchDir, SingleTrialGivesOneRowEach) {
  const auto res = run_experiment(tiny_spec(1));
  const auto p = emit_csv(res, dir);
  EXPECT_EQ(lines_of(p.raw).size(), 2u);
  EXPECT_EQ(lines_of(p.aggregate).size(), 2u);
}

TEST_F(ScratchDir, OutputIsDeterministicAcrossThreadCounts) {
  auto s = tiny_spec(4);
  s.algorithms = {"fp-bsum", "hd"};
  const auto a = run_experiment(s);
  s.threads = 3;
  const auto b = run_experiment(s);
  ASSERT_EQ(a.trials.size(), b.trials.size());
  for (std::size_t i = 0; i < a.trials.size(); ++i) {
    EXPECT_EQ(a.trials[i].weighted_sum_rate, b.trials[i].weighted_sum_rate);
    EXPECT_EQ(a.trials[i].layout.t, b.trials[i].layout.t);
    EXPECT_EQ(a.trials[i].trace, b.trials[i].trace);
  }
}

TEST_F(ScratchDir, UnwritableDestinationIsAnIoError) {
  const auto res = run_experiment(tiny_spec(1));
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  EXPECT_THROW(emit_csv(res, dir / "file" / "sub"), IoError);
}

TEST(Experiment, PositionOptimizationBeatsFixedArraysOnAverage) {
  auto s = tiny_spec(20);
  s.base = ScenarioConfig{};
  s.max_outer = 100;
  s.algorithms = {"fp-bsum", "fpas"};
  const auto r = run_experiment(s);
  EXPECT_EQ(verify::detail::failures(r), 0);
  EXPECT_GT(r.aggregates[0].mean, r.aggregates[1].mean);
}
