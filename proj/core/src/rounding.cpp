#include "hetbandit/design.hpp"

#include <cmath>
#include <limits>

namespace hetbandit {

namespace {

// ceil that ignores floating-point fuzz just above an integer.
std::int64_t fuzzy_ceil(double x) {
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, std::abs(x)))
    return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(x));
}

RoundSchedule ceiling_round(const Vector& w, double budget) {
  RoundSchedule out;
  out.mode = RoundingMode::Ceiling;
  out.counts.assign(static_cast<std::size_t>(w.size()), 0);
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) <= 0.0) continue;
    const auto c = std::max<std::int64_t>(1, fuzzy_ceil(budget * w(i)));
    out.counts[static_cast<std::size_t>(i)] = c;
    out.total += c;
  }
  return out;
}

// Pukelsheim-Rieder efficient apportionment: start from
// ceil((n - p/2) w_i) and move single units until the counts sum to n.
RoundSchedule efficient_round(const Vector& w, std::int64_t n) {
  RoundSchedule out;
  out.mode = RoundingMode::Efficient;
  auto& m = out.counts;
  m.assign(static_cast<std::size_t>(w.size()), 0);
  const double p = static_cast<double>((w.array() > 0.0).count());
  std::int64_t sum = 0;
  for (Index i = 0; i < w.size(); ++i) {
    if (w(i) <= 0.0) continue;
    const auto c = std::max<std::int64_t>(0, fuzzy_ceil((static_cast<double>(n) - 0.5 * p) * w(i)));
    m[static_cast<std::size_t>(i)] = c;
    sum += c;
  }
  while (sum < n) {
    Index best = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < w.size(); ++i) {
      if (w(i) <= 0.0) continue;
      const double ratio = static_cast<double>(m[static_cast<std::size_t>(i)]) / w(i);
      if (ratio < best_ratio) { best_ratio = ratio; best = i; }
    }
    ++m[static_cast<std::size_t>(best)];
    ++sum;
  }
  while (sum > n) {
    Index best = -1;
    double best_ratio = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < w.size(); ++i) {
      if (w(i) <= 0.0 || m[static_cast<std::size_t>(i)] == 0) continue;
      const double ratio = static_cast<double>(m[static_cast<std::size_t>(i)] - 1) / w(i);
      if (ratio > best_ratio) { best_ratio = ratio; best = i; }
    }
    --m[static_cast<std::size_t>(best)];
    --sum;
  }
  out.total = sum;
  return out;
}

}  // namespace

RoundSchedule round_design(const Design& design, double budget, RoundingMode mode) {
  if (!(budget > 0.0) || !std::isfinite(budget))
    throw Error(ErrorCode::InvalidArgument, "rounding budget must be positive and finite");
  if (design.weights.size() == 0 || (design.weights.array() < 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "design weights must be non-negative");
  if (mode == RoundingMode::Ceiling) return ceiling_round(design.weights, budget);
  const auto n = static_cast<std::int64_t>(std::floor(budget));
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "efficient rounding needs budget >= 1");
  return efficient_round(design.weights, n);
}

double schedule_value(const DesignProblem& problem, const RoundSchedule& schedule) {
  problem.validate();
  if (static_cast<Index>(schedule.counts.size()) != problem.sample_vectors.rows())
    throw Error(ErrorCode::DimensionMismatch, "schedule length does not match sample vectors");
  Vector counts(problem.sample_vectors.rows());
  for (Index i = 0; i < counts.size(); ++i)
    counts(i) = static_cast<double>(schedule.counts[static_cast<std::size_t>(i)]);
  const PdFactor factor(info_matrix(problem.sample_vectors, counts, problem.variances));
  double best = 0.0;
  for (Index v = 0; v < problem.eval_vectors.rows(); ++v)
    best = std::max(best, factor.quad_form_inv(problem.eval_vectors.row(v).transpose()));
  return best;
}

}  // namespace hetbandit
