#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hetbandit/presets.hpp"
#include "hetbandit/suite.hpp"
#include "test_support.hpp"

namespace hetbandit {
namespace {

ExperimentConfig custom_config() {
  ExperimentConfig c;
  c.preset = Preset::Custom;
  c.replications = 4;
  c.base_seed = 11;
  c.timing = false;
  c.overrides = {{"arms", "1,0;0,1;0.7071067812,0.7071067812"},
                 {"theta", "1,0.4"},
                 {"sigma", "1,0;0,0.3"},
                 {"c_prime", "1"}};
  return c;
}

ExperimentConfig varest_config() {
  ExperimentConfig c;
  c.preset = Preset::VarEstCompare;
  c.replications = 3;
  c.timing = false;
  c.overrides = {{"dims", "2,3"}, {"gammas", "2000,4000"}, {"n_unit", "12"}, {"n_small", "8"}};
  return c;
}

std::string csv_of(const SuiteResult& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

TEST(Suite, CsvLayout) {
  const auto result = run_suite(custom_config());
  std::istringstream in(csv_of(result));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# schema_version=1");
  std::getline(in, line);
  EXPECT_EQ(line, "preset,algorithm,seed,metric_name,metric_value,correct,rounds,burn_in,wall_ms,status");
  int rows = 0;
  while (std::getline(in, line) && line.rfind("#", 0) != 0) {
    EXPECT_EQ(split(line, ',').size(), 10u) << line;
    ++rows;
  }
  EXPECT_EQ(rows, 4 * 4);
  EXPECT_EQ(line, "# summary,algorithm,metric_name,n,mean,sem,correct");
}

TEST(Suite, RowsInReplicationOrderWithBaseSeedOffsets) {
  const auto result = run_suite(custom_config());
  ASSERT_EQ(result.rows.size(), 16u);
  const std::vector<std::string> algos{"hrage", "rage", "oracle-het", "oracle-hom"};
  for (std::size_t i = 0; i < result.rows.size(); ++i) {
    EXPECT_EQ(result.rows[i].seed, 11u + i / 4);
    EXPECT_EQ(result.rows[i].algorithm, algos[i % 4]);
    EXPECT_EQ(result.rows[i].status, "ok");
    EXPECT_TRUE(result.rows[i].correct);
  }
  EXPECT_FALSE(result.any_failed());
}

TEST(Suite, ByteIdenticalAcrossRunsAndThreadCounts) {
  auto config = custom_config();
  const std::string first = csv_of(run_suite(config));
  EXPECT_EQ(first, csv_of(run_suite(config)));
  config.jobs = 3;
  EXPECT_EQ(first, csv_of(run_suite(config)));
  auto v = varest_config();
  const std::string vfirst = csv_of(run_suite(v));
  v.jobs = 4;
  EXPECT_EQ(vfirst, csv_of(run_suite(v)));
}

TEST(Suite, SummaryMatchesTwoPassRecompute) {
  const auto result = run_suite(varest_config());
  std::map<std::pair<std::string, std::string>, std::vector<double>> groups;
  for (const auto& r : result.rows) groups[{r.algorithm, r.metric_name}].push_back(r.metric_value);
  ASSERT_EQ(result.summary.size(), groups.size());
  for (const auto& s : result.summary) {
    const auto& v = groups[{s.algorithm, s.metric_name}];
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sem = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
    EXPECT_EQ(s.n, static_cast<std::int64_t>(v.size()));
    EXPECT_NEAR(s.mean, mean, 1e-14 * std::max(1.0, mean));
    EXPECT_NEAR(s.sem, sem, 1e-12 * std::max(1.0, sem));
  }
}

TEST(Suite, VarianceMetricNames) {
  const auto result = run_suite(varest_config());
  ASSERT_EQ(result.rows.size(), 3u * 2u * 2u * 3u);
  EXPECT_EQ(result.rows[0].metric_name, "mae@d=2;gamma=2000");
  EXPECT_EQ(result.rows[0].algorithm, "head");
  EXPECT_EQ(result.rows[1].algorithm, "uniform");
  EXPECT_EQ(result.rows[2].algorithm, "separate");
  for (const auto& r : result.rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_GE(r.metric_value, 0.0);
  }
}

TEST(Suite, FailuresBecomeErrorRowsAndLeaveSummary) {
  auto config = varest_config();
  config.overrides["gammas"] = "4,4000";
  config.overrides["dims"] = "2";
  const auto result = run_suite(config);
  EXPECT_TRUE(result.any_failed());
  int errors = 0;
  for (const auto& r : result.rows) {
    if (r.status.rfind("error:", 0) == 0) {
      ++errors;
      EXPECT_EQ(r.status, "error:InsufficientBudget");
      EXPECT_TRUE(std::isnan(r.metric_value));
    }
  }
  EXPECT_GT(errors, 0);
  for (const auto& s : result.summary)
    if (s.algorithm == "head" && s.metric_name == "mae@d=2;gamma=4") EXPECT_EQ(s.n, 0);
  EXPECT_NE(csv_of(result).find(",nan,"), std::string::npos);
}

TEST(Suite, AlgorithmMustFitPreset) {
  auto config = custom_config();
  config.overrides["algorithms"] = "head";
  try {
    run_suite(config);
    FAIL() << "expected ConfigError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Suite, NonTerminatedRunsAreReported) {
  auto config = custom_config();
  config.replications = 1;
  config.overrides["algorithms"] = "rage";
  config.overrides["max_pulls"] = "5";
  const auto result = run_suite(config);
  ASSERT_EQ(result.rows.size(), 1u);
  EXPECT_EQ(result.rows[0].status, "non_terminated");
  EXPECT_FALSE(result.rows[0].correct);
  EXPECT_FALSE(result.any_failed());
}

TEST(Config, SettingsAndRangeChecks) {
  ExperimentConfig c;
  apply_setting(c, "preset", "example2");
  apply_setting(c, "reps", "5");
  apply_setting(c, "seed", "99");
  apply_setting(c, "delta", "0.1");
  apply_setting(c, "jobs", "2");
  apply_setting(c, "timing", "false");
  apply_setting(c, "beta_sq", "0.3");
  EXPECT_EQ(c.preset, Preset::Example2);
  EXPECT_EQ(c.replications, 5);
  EXPECT_EQ(c.base_seed, 99u);
  EXPECT_DOUBLE_EQ(c.delta, 0.1);
  EXPECT_EQ(c.jobs, 2);
  EXPECT_FALSE(c.timing);
  EXPECT_DOUBLE_EQ(resolve_params(c).beta_sq, 0.3);
  EXPECT_EQ(resolve_params(c).d, 3);

  const auto code_of = [](auto fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  EXPECT_EQ(code_of([&] { apply_setting(c, "preset", "nope"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { apply_setting(c, "delta", "1.5"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { apply_setting(c, "reps", "abc"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([&] { apply_setting(c, "reps", "0"); }), ErrorCode::ConfigError);
  ExperimentConfig bad = c;
  bad.overrides["kappa"] = "3";
  EXPECT_EQ(code_of([&] { resolve_params(bad); }), ErrorCode::ConfigError);
  bad = c;
  bad.overrides["omega"] = "2";
  EXPECT_EQ(code_of([&] { resolve_params(bad); }), ErrorCode::ConfigError);
  bad = c;
  bad.overrides["d"] = "1";
  EXPECT_EQ(code_of([&] { resolve_params(bad); }), ErrorCode::ConfigError);
}

TEST(Config, FileWithComments) {
  const std::string path = ::testing::TempDir() + "hetbandit_config_test.cfg";
  {
    std::ofstream out(path);
    out << "# experiment\npreset = intro\n\nreps = 7   # trailing\nkappa = 5\nc_prime=1\n";
  }
  const auto c = load_config_file(path);
  EXPECT_EQ(c.preset, Preset::IntroKappa);
  EXPECT_EQ(c.replications, 7);
  EXPECT_DOUBLE_EQ(resolve_params(c).kappa, 5.0);
  EXPECT_DOUBLE_EQ(resolve_params(c).c_prime, 1.0);
  std::remove(path.c_str());
  try {
    load_config_file(path);
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Config, MalformedLineIsRejected) {
  const std::string path = ::testing::TempDir() + "hetbandit_bad_config_test.cfg";
  {
    std::ofstream out(path);
    out << "preset intro\n";
  }
  EXPECT_THROW(load_config_file(path), Error);
  std::remove(path.c_str());
}

TEST(Config, CustomPresetNeedsModel) {
  ExperimentConfig c;
  c.preset = Preset::Custom;
  c.overrides["arms"] = "1,0;0,1";
  EXPECT_THROW(resolve_params(c), Error);
  c.overrides["theta"] = "1,1";
  c.overrides["sigma"] = "1,0;0,1";
  EXPECT_THROW(build_task(c, resolve_params(c)), Error);
  c.overrides["objective"] = "ls";
  c.overrides["alpha"] = "0.5";
  const auto task = build_task(c, resolve_params(c));
  EXPECT_EQ(task.objective(), Objective::LevelSet);
  c.overrides["arms"] = "1,0;0";
  EXPECT_THROW(build_task(c, resolve_params(c)), Error);
}

TEST(Presets, NamesRoundTrip) {
  for (const char* name : {"intro", "varest", "example1", "example2", "multivariate", "custom"})
    EXPECT_STREQ(to_string(parse_preset(name)), name);
  EXPECT_THROW(parse_preset("fig9"), Error);
}

TEST(Presets, IntroInstance) {
  for (double kappa : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    const auto inst = intro_instance(kappa);
    const Vector& v = inst.arm_variances();
    EXPECT_NEAR(v(0), 1.0, 1e-12);
    EXPECT_NEAR(v(1), kappa, 1e-12);
    EXPECT_GE(v(2), 1.0 - 1e-12);
    EXPECT_LE(v(2), kappa + 1e-12);
    EXPECT_NEAR(inst.kappa(), kappa, 1e-12);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<Matrix>(inst.sigma_star()).eigenvalues().minCoeff(),
              -1e-12);
  }
  EXPECT_LT((intro_instance(1.0).sigma_star() - Matrix::Identity(2, 2)).norm(), 1e-12);
  EXPECT_THROW(intro_instance(0.5), Error);
}

TEST(Presets, ExampleOneLayout) {
  const auto inst = example1_instance(4, 0.02, 0.4);
  EXPECT_EQ(inst.num_arms(), 9);
  EXPECT_EQ(inst.arms(), inst.targets());
  EXPECT_NEAR(inst.arms()(2, 2), 0.4, 1e-15);
  EXPECT_NEAR(inst.arms()(4, 0), std::cos(0.02), 1e-15);
  EXPECT_NEAR(inst.arms()(4, 1), std::sin(0.02), 1e-15);
  EXPECT_NEAR(inst.arms()(8, 3), 0.1, 1e-15);
  EXPECT_EQ(example1_instance(6, 0.02, 0.4).num_arms(), 2 + 4 + 5 + 2);
  EXPECT_THROW(example1_instance(3, 0.02, 0.4), Error);
}

TEST(Presets, ExampleTwoLayout) {
  const auto inst = example2_instance(3, 0.02, 1.0, 0.2);
  EXPECT_EQ(inst.num_arms(), 2 + 1 + 3);
  Vector diag(3);
  diag << 1.0, 0.2, 0.2;
  EXPECT_EQ(inst.sigma_star().diagonal(), diag);
  EXPECT_EQ(example2_instance(5, 0.02, 1.0, 0.2).sigma_star()(3, 3), 1.0);
}

TEST(Presets, MultivariateEncoding) {
  const auto inst = multivariate_instance();
  EXPECT_EQ(inst.num_arms(), 8);
  Vector x(7);
  x << 1, 1, 0, 1, 0, 1, 0;
  EXPECT_EQ(multivariate_layout(1, 0, 1), x);
  EXPECT_EQ(inst.arms().row(5).transpose(), x);
  const IdentTask task(inst, Objective::BestArm, 0.05);
  EXPECT_EQ(task.best_target(), 1);
  EXPECT_EQ(inst.arms().row(task.best_target()).transpose(), multivariate_layout(0, 0, 1));
}

TEST(Presets, VarianceSetIsSeeded) {
  const auto a = varest_instance(4, 10, 20, 3);
  const auto b = varest_instance(4, 10, 20, 3);
  EXPECT_EQ(a.arms(), b.arms());
  EXPECT_NE(a.arms(), varest_instance(4, 10, 20, 4).arms());
  EXPECT_EQ(a.num_arms(), 30);
  for (Index i = 0; i < 30; ++i)
    EXPECT_NEAR(a.arms().row(i).norm(), i < 10 ? 1.0 : 0.1, 1e-12);
  Vector diag(4);
  diag << 1.0, 0.1, 1.0, 0.1;
  EXPECT_EQ(a.sigma_star().diagonal(), diag);
}

TEST(DesignTable, WeightsSumToOnePerSource) {
  const IdentTask task(intro_instance(20.0), Objective::BestArm, 0.05);
  std::ostringstream out;
  emit_design_table(out, task, VarianceSource::TrueVariances);
  emit_design_table(out, task, VarianceSource::MaxVariance, false);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "source,arm,vector,variance,weight");
  std::map<std::string, double> totals;
  int rows = 0;
  while (std::getline(in, line)) {
    const auto f = split(line, ',');
    ASSERT_EQ(f.size(), 5u);
    totals[f[0]] += std::stod(f[4]);
    ++rows;
  }
  EXPECT_EQ(rows, 6);
  for (const auto& [source, total] : totals) EXPECT_NEAR(total, 1.0, 1e-8) << source;
}

TEST(Output, WriteTextFileReportsPath) {
  try {
    write_text_file("/nonexistent-dir/out.csv", "x");
    FAIL() << "expected IoError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
    EXPECT_NE(std::string(e.what()).find("/nonexistent-dir/out.csv"), std::string::npos);
  }
}

}  // namespace
}  // namespace hetbandit
