#include "hetbandit/suite.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <thread>

#include "hetbandit/env.hpp"
#include "hetbandit/varest.hpp"

namespace hetbandit {

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

bool is_identification_algorithm(const std::string& name) {
  return name == "hrage" || name == "rage" || name == "oracle-het" || name == "oracle-hom";
}

bool is_variance_algorithm(const std::string& name) {
  return name == "head" || name == "uniform" || name == "separate";
}

// One unit of work: fills a row, never throws.
struct Cell {
  std::size_t slot = 0;
  std::function<void(SuiteRow&)> run;
};

void run_guarded(const Cell& cell, SuiteRow& row, bool timing) {
  const auto start = std::chrono::steady_clock::now();
  try {
    cell.run(row);
  } catch (const Error& e) {
    row.status = "error:" + std::string(to_string(e.code()));
    row.metric_value = std::nan("");
    row.correct = false;
  } catch (const std::exception&) {
    row.status = "error:internal";
    row.metric_value = std::nan("");
    row.correct = false;
  }
  if (timing) {
    row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
                      .count();
  }
}

void fill_from_trace(SuiteRow& row, const RunTrace& trace) {
  row.metric_name = "total_pulls";
  row.metric_value = static_cast<double>(trace.total_pulls);
  row.correct = trace.correct;
  row.rounds = static_cast<int>(trace.rounds.size());
  row.burn_in = trace.burn_in_pulls;
  row.status = trace.terminated ? "ok" : "non_terminated";
}

}  // namespace

bool SuiteResult::any_failed() const noexcept {
  for (const auto& r : rows)
    if (r.status.rfind("error", 0) == 0) return true;
  return false;
}

std::vector<std::string> default_algorithms(Preset preset) {
  if (preset == Preset::VarEstCompare) return {"head", "uniform", "separate"};
  return {"hrage", "rage", "oracle-het", "oracle-hom"};
}

SuiteResult run_suite(const ExperimentConfig& config) {
  const PresetParams params = resolve_params(config);
  const bool variance = config.preset == Preset::VarEstCompare;
  std::vector<std::string> algorithms =
      params.algorithms.empty() ? default_algorithms(config.preset) : params.algorithms;
  for (const auto& a : algorithms) {
    const bool ok = variance ? is_variance_algorithm(a) : is_identification_algorithm(a);
    if (!ok)
      throw Error(ErrorCode::ConfigError, "algorithm '" + a + "' does not apply to preset " +
                                              to_string(config.preset));
  }

  // Validates the identification instance before any work is scheduled.
  std::optional<IdentTask> task;
  if (!variance) task.emplace(build_task(config, params));

  IdentConfig ident;
  ident.c_prime = params.c_prime;
  ident.fw_tolerance = params.fw_tolerance;
  ident.max_rounds = params.max_rounds;
  ident.max_total_pulls = params.max_total_pulls;

  const std::string preset_name = to_string(config.preset);
  std::vector<SuiteRow> rows;
  std::vector<Cell> cells;
  for (int rep = 0; rep < config.replications; ++rep) {
    const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(rep);
    std::uint32_t lane = 0;
    auto add = [&](const std::string& algorithm, std::function<void(SuiteRow&)> run) {
      SuiteRow row;
      row.preset = preset_name;
      row.algorithm = algorithm;
      row.seed = seed;
      rows.push_back(row);
      cells.push_back({rows.size() - 1, std::move(run)});
      ++lane;
    };
    if (variance) {
      for (int d : params.dims) {
        for (auto gamma : params.gammas) {
          const std::string metric =
              "mae@d=" + std::to_string(d) + ";gamma=" + std::to_string(gamma);
          for (const auto& algorithm : algorithms) {
            add(algorithm, [=, &params](SuiteRow& row) {
              row.metric_name = metric;
              const HeteroInstance inst = varest_instance(d, params.n_unit, params.n_small, seed);
              Environment env(inst, seed, lane);
              VarianceEstimate est;
              if (algorithm == "head") est = head_estimate(inst, env, gamma);
              else if (algorithm == "uniform") est = uniform_estimate(inst, env, gamma, seed);
              else est = separate_arm_estimate(inst, env, gamma);
              row.metric_value = mae(est, inst);
              row.correct = true;
            });
          }
        }
      }
    } else {
      for (const auto& algorithm : algorithms) {
        add(algorithm, [=, &task, &ident](SuiteRow& row) {
          Environment env(task->instance(), seed, lane);
          RunTrace trace;
          if (algorithm == "hrage") trace = hrage_run(*task, env, ident);
          else if (algorithm == "rage") trace = rage_run(*task, env, ident);
          else if (algorithm == "oracle-het")
            trace = oracle_run(*task, env, VarianceSource::TrueVariances);
          else trace = oracle_run(*task, env, VarianceSource::MaxVariance);
          fill_from_trace(row, trace);
        });
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++)
      run_guarded(cells[i], rows[cells[i].slot], config.timing);
  };
  const auto jobs = static_cast<std::size_t>(std::max(1, config.jobs));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < std::min(jobs, cells.size()); ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SuiteResult result;
  result.rows = std::move(rows);
  result.summary = summarize(result.rows);
  return result;
}

std::vector<SummaryRow> summarize(const std::vector<SuiteRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::pair<std::string, std::string>, std::vector<const SuiteRow*>> groups;
  for (const auto& r : rows) {
    if (r.status.rfind("error", 0) == 0) continue;
    auto key = std::make_pair(r.algorithm, r.metric_name);
    if (!groups.count(key)) {
      SummaryRow s;
      s.algorithm = r.algorithm;
      s.metric_name = r.metric_name;
      out.push_back(s);
    }
    groups[key].push_back(&r);
  }
  for (auto& s : out) {
    const auto& members = groups[{s.algorithm, s.metric_name}];
    s.n = static_cast<std::int64_t>(members.size());
    double sum = 0.0;
    for (const auto* r : members) {
      sum += r->metric_value;
      s.correct += r->correct ? 1 : 0;
    }
    s.mean = sum / static_cast<double>(s.n);
    if (s.n > 1) {
      double ss = 0.0;
      for (const auto* r : members) ss += (r->metric_value - s.mean) * (r->metric_value - s.mean);
      s.sem = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
    }
  }
  return out;
}

void write_csv(std::ostream& out, const SuiteResult& result) {
  out << "# schema_version=" << kCsvSchemaVersion << '\n';
  out << "preset,algorithm,seed,metric_name,metric_value,correct,rounds,burn_in,wall_ms,status\n";
  for (const auto& r : result.rows) {
    out << r.preset << ',' << r.algorithm << ',' << r.seed << ',' << r.metric_name << ','
        << format_number(r.metric_value) << ',' << (r.correct ? 1 : 0) << ',' << r.rounds << ','
        << r.burn_in << ',' << format_number(std::round(r.wall_ms * 1000.0) / 1000.0) << ','
        << r.status << '\n';
  }
  out << "# summary,algorithm,metric_name,n,mean,sem,correct\n";
  for (const auto& s : result.summary) {
    out << "# summary," << s.algorithm << ',' << s.metric_name << ',' << s.n << ','
        << format_number(s.mean) << ',' << format_number(s.sem) << ',' << s.correct << '\n';
  }
}

void emit_design_table(std::ostream& out, const IdentTask& task, VarianceSource source,
                       bool header) {
  const HeteroInstance& inst = task.instance();
  const Vector variances = oracle_variances(inst, source);
  const ComplexityReport report = psi_star(task, variances);
  if (header) out << "source,arm,vector,variance,weight\n";
  for (Index i = 0; i < inst.num_arms(); ++i) {
    out << to_string(source) << ',' << i << ',';
    for (Index j = 0; j < inst.dimension(); ++j)
      out << (j ? ";" : "") << format_number(inst.arms()(i, j));
    out << ',' << format_number(variances(i)) << ','
        << format_number(report.psi_design.weights(i)) << '\n';
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path + "'");
}

}  // namespace hetbandit
