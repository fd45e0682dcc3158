#ifndef HETBANDIT_PRESETS_HPP
#define HETBANDIT_PRESETS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetbandit/core.hpp"
#include "hetbandit/ident.hpp"

namespace hetbandit {

enum class Preset { IntroKappa, VarEstCompare, Example1, Example2, MultivariateTest, Custom };

/// Accepts intro, varest, example1, example2, multivariate, custom.
Preset parse_preset(std::string_view name);
const char* to_string(Preset preset) noexcept;

/// Typed preset parameters after overrides are applied.
struct PresetParams {
  int d = 0;
  double omega = 0.02;
  double q = 0.4;
  double alpha_sq = 1.0;
  double beta_sq = 0.2;
  double kappa = 20.0;
  std::vector<double> kappas{1.0, 2.0, 5.0, 10.0, 20.0};
  /// Variance-estimation budgets and dimensions.
  std::vector<std::int64_t> gammas{10000, 20000, 40000, 80000};
  std::vector<int> dims{6};
  int n_unit = 100;
  int n_small = 400;
  double c_prime = 1.0;
  double fw_tolerance = 1e-3;
  int max_rounds = 40;
  std::int64_t max_total_pulls = 10'000'000'000;
  std::vector<std::string> algorithms;
  /// Custom preset: rows separated by ';', entries by ','.
  std::string arms, targets, theta, sigma;
  Objective objective = Objective::BestArm;
  double alpha = 0.0;
};

struct ExperimentConfig {
  Preset preset = Preset::Example1;
  int replications = 32;
  std::uint64_t base_seed = 1;
  double delta = 0.05;
  int jobs = 1;
  /// When false wall_ms is written as 0 so reruns are byte-identical.
  bool timing = true;
  std::string output_path;
  std::map<std::string, std::string> overrides;
};

/// Reads a flat `key = value` file ('#' starts a comment). Keys preset, reps,
/// seed, delta, jobs, timing and out fill the config fields; every other key
/// becomes an override. Throws IoError / ConfigError.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Applies one `key=value` pair as load_config_file would.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Defaults of the preset merged with the overrides. Throws ConfigError on
/// unknown keys or out-of-range values, UnknownPreset is never thrown here.
PresetParams resolve_params(const ExperimentConfig& config);

/// Three arms e1, e2, (cos 0.5, sin 0.5) with theta* = e1. Sigma* has unit
/// variance on e1 and kappa on e2; the covariance is the most negative value
/// keeping Sigma* PSD and x3's variance >= 1, so x2 is the only noisy arm.
/// Variance bounds are [1, kappa].
HeteroInstance intro_instance(double kappa);

/// H = {e1, e2, q e_3..q e_d, cos w e1 + sin w e_i (i >= 2)} followed by
/// G = {0.5(e1+e2)+0.1e3, 0.5(e1+e2)+0.1(e3+e4)}; theta* = e1, Sigma* = I.
HeteroInstance example1_instance(int d, double omega, double q);

/// {e1, cos w e1 + sin w e2, e3..ed, (e_i+e_j)/sqrt2 for i<j}; theta* = e1,
/// Sigma* = diag(alpha^2, beta^2, beta^2, alpha^2, ...).
HeteroInstance example2_instance(int d, double omega, double alpha_sq, double beta_sq);

/// Three dimensions with two variations each. Layout (a1, a2, a3) in
/// {0,1}^3 (a_i = 1 picks the second variation, a1 most significant) maps to
/// (1, a1, a2, a3, a1a2, a1a3, a2a3).
HeteroInstance multivariate_instance();
Vector multivariate_layout(int a1, int a2, int a3);

/// n_unit arms uniform on the unit sphere then n_small on the radius-0.1
/// sphere, drawn from `seed`; Sigma* = diag(1, 0.1, 1, 0.1, ...),
/// theta* = 1, variance bounds tight over the arms.
HeteroInstance varest_instance(int d, int n_unit, int n_small, std::uint64_t seed);

/// Instance of an identification preset (not VarEstCompare).
HeteroInstance build_instance(Preset preset, const PresetParams& params);

/// Identification task of a preset; throws ConfigError for VarEstCompare.
IdentTask build_task(const ExperimentConfig& config, const PresetParams& params);

}  // namespace hetbandit

#endif  // HETBANDIT_PRESETS_HPP
