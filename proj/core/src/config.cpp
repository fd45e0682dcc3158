#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "hetbandit/presets.hpp"

namespace hetbandit {

namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(begin, end - begin + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw Error(ErrorCode::ConfigError, "invalid value '" + value + "' for " + key + ": " + why);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string s = trim(value);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v))
    bad_value(key, value, "expected a finite number");
  return v;
}

long long parse_int(const std::string& key, const std::string& value) {
  const std::string s = trim(value);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    bad_value(key, value, "expected an integer");
  return v;
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  const std::string s = trim(value);
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (s.empty() || s.front() == '-' || end != s.c_str() + s.size() || errno == ERANGE)
    bad_value(key, value, "expected a non-negative integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  const std::string s = trim(value);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  bad_value(key, value, "expected true or false");
}

Matrix parse_rows(const std::string& key, const std::string& text) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : split(text, ';')) {
    if (row.empty()) continue;
    std::vector<double> values;
    for (const auto& item : split(row, ',')) values.push_back(parse_double(key, item));
    if (!rows.empty() && values.size() != rows.front().size())
      bad_value(key, text, "rows differ in length");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) bad_value(key, text, "expected at least one row");
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return out;
}

// Keys each preset understands beyond the shared ones.
std::set<std::string> preset_keys(Preset preset) {
  switch (preset) {
    case Preset::IntroKappa: return {"kappa", "kappas"};
    case Preset::VarEstCompare: return {"gammas", "dims", "n_unit", "n_small"};
    case Preset::Example1: return {"d", "omega", "q"};
    case Preset::Example2: return {"d", "omega", "alpha_sq", "beta_sq"};
    case Preset::MultivariateTest: return {};
    case Preset::Custom: return {"arms", "targets", "theta", "sigma", "objective", "alpha"};
  }
  return {};
}

const std::set<std::string> kSharedKeys{"c_prime", "fw_tol", "max_rounds", "max_pulls",
                                        "algorithms"};

void require(bool ok, const std::string& key, const std::string& value, const char* why) {
  if (!ok) bad_value(key, value, why);
}

}  // namespace

void apply_setting(ExperimentConfig& config, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key.empty()) throw Error(ErrorCode::ConfigError, "empty key");
  if (key == "preset") {
    try {
      config.preset = parse_preset(value);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, e.what());
    }
  } else if (key == "reps") {
    const auto v = parse_int(key, value);
    require(v >= 1 && v <= 1'000'000, key, value, "must be between 1 and 1000000");
    config.replications = static_cast<int>(v);
  } else if (key == "seed") {
    config.base_seed = parse_seed(key, value);
  } else if (key == "delta") {
    const double v = parse_double(key, value);
    require(v > 0.0 && v < 1.0, key, value, "must lie in (0, 1)");
    config.delta = v;
  } else if (key == "jobs") {
    const auto v = parse_int(key, value);
    require(v >= 1 && v <= 1024, key, value, "must be between 1 and 1024");
    config.jobs = static_cast<int>(v);
  } else if (key == "timing") {
    config.timing = parse_bool(key, value);
  } else if (key == "out") {
    config.output_path = value;
  } else {
    config.overrides[key] = value;
  }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open config file '" + path + "'");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError,
                  path + ":" + std::to_string(number) + ": expected key = value");
    apply_setting(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

PresetParams resolve_params(const ExperimentConfig& config) {
  PresetParams p;
  switch (config.preset) {
    case Preset::IntroKappa: p.d = 2; break;
    case Preset::VarEstCompare: p.d = 6; break;
    case Preset::Example1: p.d = 4; break;
    case Preset::Example2: p.d = 3; break;
    case Preset::MultivariateTest: p.d = 7; break;
    case Preset::Custom: p.d = 0; break;
  }
  const auto allowed = preset_keys(config.preset);
  for (const auto& [key, value] : config.overrides) {
    if (!allowed.count(key) && !kSharedKeys.count(key))
      throw Error(ErrorCode::ConfigError, "key '" + key + "' does not apply to preset " +
                                              to_string(config.preset));
    if (key == "d") {
      const auto v = parse_int(key, value);
      const int lo = config.preset == Preset::Example1 ? 4 : 3;
      require(v >= lo && v <= 50, key, value, "outside the supported dimension range");
      p.d = static_cast<int>(v);
    } else if (key == "omega") {
      p.omega = parse_double(key, value);
      require(p.omega > 0.0 && p.omega < std::numbers::pi / 2, key, value, "must lie in (0, pi/2)");
    } else if (key == "q") {
      p.q = parse_double(key, value);
      require(p.q > 0.0 && p.q < 1.0, key, value, "must lie in (0, 1)");
    } else if (key == "alpha_sq") {
      p.alpha_sq = parse_double(key, value);
      require(p.alpha_sq > 0.0, key, value, "must be positive");
    } else if (key == "beta_sq") {
      p.beta_sq = parse_double(key, value);
      require(p.beta_sq > 0.0, key, value, "must be positive");
    } else if (key == "kappa") {
      p.kappa = parse_double(key, value);
      require(p.kappa >= 1.0, key, value, "must be at least 1");
    } else if (key == "kappas") {
      p.kappas.clear();
      for (const auto& item : split(value, ',')) {
        p.kappas.push_back(parse_double(key, item));
        require(p.kappas.back() >= 1.0, key, value, "every kappa must be at least 1");
      }
      require(!p.kappas.empty(), key, value, "needs at least one entry");
    } else if (key == "gammas") {
      p.gammas.clear();
      for (const auto& item : split(value, ',')) {
        p.gammas.push_back(parse_int(key, item));
        require(p.gammas.back() >= 2, key, value, "every budget must be at least 2");
      }
      require(!p.gammas.empty(), key, value, "needs at least one entry");
    } else if (key == "dims") {
      p.dims.clear();
      for (const auto& item : split(value, ',')) {
        const auto v = parse_int(key, item);
        require(v >= 1 && v <= 50, key, value, "every dimension must lie in [1, 50]");
        p.dims.push_back(static_cast<int>(v));
      }
      require(!p.dims.empty(), key, value, "needs at least one entry");
    } else if (key == "n_unit" || key == "n_small") {
      const auto v = parse_int(key, value);
      require(v >= 0 && v <= 1'000'000, key, value, "must lie in [0, 1000000]");
      (key == "n_unit" ? p.n_unit : p.n_small) = static_cast<int>(v);
    } else if (key == "c_prime") {
      p.c_prime = parse_double(key, value);
      require(p.c_prime > 0.0, key, value, "must be positive");
    } else if (key == "fw_tol") {
      p.fw_tolerance = parse_double(key, value);
      require(p.fw_tolerance > 0.0 && p.fw_tolerance < 1.0, key, value, "must lie in (0, 1)");
    } else if (key == "max_rounds") {
      const auto v = parse_int(key, value);
      require(v >= 1 && v <= 60, key, value, "must lie in [1, 60]");
      p.max_rounds = static_cast<int>(v);
    } else if (key == "max_pulls") {
      p.max_total_pulls = parse_int(key, value);
      require(p.max_total_pulls >= 1, key, value, "must be positive");
    } else if (key == "algorithms") {
      p.algorithms = split(value, ',');
    } else if (key == "arms") {
      p.arms = value;
    } else if (key == "targets") {
      p.targets = value;
    } else if (key == "theta") {
      p.theta = value;
    } else if (key == "sigma") {
      p.sigma = value;
    } else if (key == "objective") {
      if (value == "bai") p.objective = Objective::BestArm;
      else if (value == "ls") p.objective = Objective::LevelSet;
      else bad_value(key, value, "expected bai or ls");
    } else if (key == "alpha") {
      p.alpha = parse_double(key, value);
    }
  }
  if (config.preset == Preset::VarEstCompare)
    require(p.n_unit + p.n_small >= 1, "n_unit", std::to_string(p.n_unit), "no arms left");
  if (config.preset == Preset::Custom &&
      (p.arms.empty() || p.theta.empty() || p.sigma.empty()))
    throw Error(ErrorCode::ConfigError, "custom preset needs arms, theta and sigma");
  return p;
}

HeteroInstance build_instance(Preset preset, const PresetParams& p) {
  try {
    switch (preset) {
      case Preset::IntroKappa: return intro_instance(p.kappa);
      case Preset::Example1: return example1_instance(p.d, p.omega, p.q);
      case Preset::Example2: return example2_instance(p.d, p.omega, p.alpha_sq, p.beta_sq);
      case Preset::MultivariateTest: return multivariate_instance();
      case Preset::Custom: {
        const Matrix arms = parse_rows("arms", p.arms);
        const Matrix targets = p.targets.empty() ? arms : parse_rows("targets", p.targets);
        const Matrix theta = parse_rows("theta", p.theta);
        if (theta.rows() != 1) bad_value("theta", p.theta, "expected a single row");
        return HeteroInstance::with_tight_bounds(arms, targets, theta.row(0).transpose(),
                                                 parse_rows("sigma", p.sigma));
      }
      case Preset::VarEstCompare: break;
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(ErrorCode::ConfigError, std::string("preset instance is invalid: ") + e.what());
  }
  throw Error(ErrorCode::ConfigError, "the variance preset has no single instance");
}

IdentTask build_task(const ExperimentConfig& config, const PresetParams& params) {
  HeteroInstance inst = build_instance(config.preset, params);
  const Objective objective =
      config.preset == Preset::Custom ? params.objective : Objective::BestArm;
  try {
    return IdentTask(std::move(inst), objective, config.delta, params.alpha);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("preset task is invalid: ") + e.what());
  }
}

}  // namespace hetbandit
