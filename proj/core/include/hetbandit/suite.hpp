#ifndef HETBANDIT_SUITE_HPP
#define HETBANDIT_SUITE_HPP

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hetbandit/ident.hpp"
#include "hetbandit/presets.hpp"

namespace hetbandit {

inline constexpr int kCsvSchemaVersion = 1;

struct SuiteRow {
  std::string preset;
  std::string algorithm;
  std::uint64_t seed = 0;
  std::string metric_name;
  double metric_value = 0.0;
  bool correct = false;
  int rounds = 0;
  std::int64_t burn_in = 0;
  double wall_ms = 0.0;
  /// "ok", "non_terminated" or "error:<code>".
  std::string status = "ok";
};

struct SummaryRow {
  std::string algorithm;
  std::string metric_name;
  std::int64_t n = 0;
  double mean = 0.0;
  /// Standard error of the mean, sample standard deviation / sqrt(n).
  double sem = 0.0;
  std::int64_t correct = 0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  std::vector<SummaryRow> summary;
  bool any_failed() const noexcept;
};

/// Algorithms run when the config does not list them.
std::vector<std::string> default_algorithms(Preset preset);

/// Runs every (replication, algorithm[, d, gamma]) cell on `config.jobs`
/// workers. Rows come back in replication order whatever the completion
/// order. Failures become rows with an error status.
SuiteResult run_suite(const ExperimentConfig& config);

/// Mean and SEM per (algorithm, metric) over rows with status ok or
/// non_terminated, in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<SuiteRow>& rows);

/// `# schema_version=1`, the header row, one line per row, then
/// `# summary,...` lines.
void write_csv(std::ostream& out, const SuiteResult& result);

/// Oracle allocation per arm: source,arm,vector,variance,weight.
void emit_design_table(std::ostream& out, const IdentTask& task, VarianceSource source,
                       bool header = true);

/// Writes `text` to `path`, throwing IoError with the path on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace hetbandit

#endif  // HETBANDIT_SUITE_HPP
