#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetbandit/ident.hpp"
#include "hetbandit/presets.hpp"
#include "hetbandit/suite.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRun = 3;

struct CommonOptions {
  std::string preset;
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<double> delta;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
  cmd->add_option("--preset", opts.preset,
                  "intro, varest, example1, example2, multivariate or custom");
  cmd->add_option("--config", opts.config_path, "key = value configuration file");
  cmd->add_option("--set", opts.settings, "override as key=value (repeatable)");
  cmd->add_option("--delta", opts.delta, "confidence level");
  cmd->add_option("--out", opts.out, "output CSV path (stdout when omitted)");
}

hetbandit::ExperimentConfig build_config(const CommonOptions& opts) {
  hetbandit::ExperimentConfig config;
  if (!opts.config_path.empty()) config = hetbandit::load_config_file(opts.config_path, config);
  if (!opts.preset.empty()) hetbandit::apply_setting(config, "preset", opts.preset);
  if (opts.delta) hetbandit::apply_setting(config, "delta", std::to_string(*opts.delta));
  if (!opts.out.empty()) config.output_path = opts.out;
  for (const auto& s : opts.settings) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw hetbandit::Error(hetbandit::ErrorCode::ConfigError,
                             "--set expects key=value, got '" + s + "'");
    hetbandit::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
  }
  return config;
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty()) std::cout << text;
  else hetbandit::write_text_file(path, text);
}

int exit_code_for(hetbandit::ErrorCode code) {
  switch (code) {
    case hetbandit::ErrorCode::ConfigError:
    case hetbandit::ErrorCode::UnknownPreset:
    case hetbandit::ErrorCode::InvalidArgument:
      return kExitConfig;
    default:
      return kExitRun;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heteroskedastic pure-exploration linear bandits"};
  app.require_subcommand(1);

  CommonOptions run_opts;
  int reps = 0;
  std::optional<unsigned long long> seed;
  int jobs = 0;
  bool no_timing = false;
  auto* run = app.add_subcommand("run", "run replications of a preset and write CSV rows");
  add_common(run, run_opts);
  run->add_option("--reps", reps, "number of replications")->check(CLI::PositiveNumber);
  run->add_option("--seed", seed, "base seed");
  run->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  run->add_flag("--no-timing", no_timing, "write wall_ms as 0 for byte-identical output");

  CommonOptions design_opts;
  std::optional<double> design_kappa;
  std::string source = "both";
  auto* design = app.add_subcommand("design", "write oracle allocations per arm");
  add_common(design, design_opts);
  design->add_option("--kappa", design_kappa, "kappa of the intro preset");
  design->add_option("--source", source, "true, max or both")
      ->check(CLI::IsMember({"true", "max", "both"}));

  CommonOptions cx_opts;
  auto* complexity = app.add_subcommand("complexity", "print psi*, rho*, their ratio and the lower bound");
  add_common(complexity, cx_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (run->parsed()) {
      auto config = build_config(run_opts);
      if (reps > 0) config.replications = reps;
      if (seed) config.base_seed = *seed;
      if (jobs > 0) config.jobs = jobs;
      if (no_timing) config.timing = false;
      const auto result = hetbandit::run_suite(config);
      std::ostringstream csv;
      hetbandit::write_csv(csv, result);
      emit(config.output_path, csv.str());
      for (const auto& row : result.rows)
        if (row.status.rfind("error", 0) == 0)
          std::cerr << "run failed: " << row.algorithm << " seed " << row.seed << " "
                    << row.metric_name << ": " << row.status << '\n';
      return result.any_failed() ? kExitRun : 0;
    }

    if (design->parsed()) {
      auto config = build_config(design_opts);
      if (design_kappa) hetbandit::apply_setting(config, "kappa", std::to_string(*design_kappa));
      const auto params = hetbandit::resolve_params(config);
      const auto task = hetbandit::build_task(config, params);
      std::ostringstream csv;
      bool header = true;
      if (source != "max") {
        hetbandit::emit_design_table(csv, task, hetbandit::VarianceSource::TrueVariances, header);
        header = false;
      }
      if (source != "true")
        hetbandit::emit_design_table(csv, task, hetbandit::VarianceSource::MaxVariance, header);
      emit(config.output_path, csv.str());
      return 0;
    }

    auto config = build_config(cx_opts);
    const auto params = hetbandit::resolve_params(config);
    const auto task = hetbandit::build_task(config, params);
    const auto report =
        hetbandit::psi_star(task, task.instance().arm_variances());
    std::ostringstream text;
    text.precision(10);
    text << "preset " << hetbandit::to_string(config.preset) << '\n'
         << "kappa " << task.instance().kappa() << '\n'
         << "gap " << hetbandit::gap_delta(task) << '\n'
         << "psi_star " << report.psi_star << '\n'
         << "rho_star " << report.rho_star << '\n'
         << "ratio " << report.ratio() << '\n'
         << "lower_bound_samples " << report.lower_bound_samples(task.delta()) << '\n';
    emit(config.output_path, text.str());
    return 0;
  } catch (const hetbandit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRun;
  }
}
