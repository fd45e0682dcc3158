#ifndef HETBANDIT_DESIGN_HPP
#define HETBANDIT_DESIGN_HPP

#include <cstdint>
#include <vector>

#include "hetbandit/core.hpp"

namespace hetbandit {

/// min over lambda in the simplex of max_{v in eval} v^T A(lambda)^{-1} v with
/// A(lambda) = sum_x lambda_x x x^T / variance_x.
///
/// Vectors are stored one per row. Sample vectors need not span the ambient
/// space: the problem is solved inside span(sample_vectors), and every eval
/// vector must lie in that span.
struct DesignProblem {
  Matrix sample_vectors;
  Matrix eval_vectors;
  /// Per-sample noise variance; all ones for an unweighted design.
  Vector variances;
  double tolerance = 1e-3;
  int max_iters = 20000;

  /// Unweighted design evaluated on its own sample vectors (G-optimal).
  static DesignProblem g_optimal(Matrix vectors, double tolerance = 1e-3);

  /// Throws DimensionMismatch / InvalidArgument on malformed input.
  void validate() const;
};

/// Frank-Wolfe on the simplex.
///
/// For unweighted self-evaluating problems the iteration runs on log det A
/// with away steps, whose optimum has value rank(sample_vectors)
/// (Kiefer-Wolfowitz); the stopping test is
/// max_x x^T A^{-1} x <= rank * (1 + tolerance).
/// Otherwise the max is smoothed by a log-sum-exp with a growing
/// temperature and pairwise steps move mass between support points. Every
/// iterate yields the dual lower bound
///   g_mu(lambda)^2 / max_x x^T A^{-1} B_mu A^{-1} x / variance_x,
/// with mu the softmax weights, B_mu = sum_v mu_v v v^T and
/// g_mu = tr(A^{-1} B_mu). The solver stops once
/// (value - best lower bound) <= tolerance * value.
///
/// Weights below 1e-7 are pruned and the rest renormalized before return.
/// Hitting max_iters returns the best iterate with certified = false.
/// Ties in every argmax scan go to the lowest index.
Design solve_design(const DesignProblem& problem);

/// max_v v^T A(lambda)^{-1} v for an arbitrary lambda.
double design_value(const DesignProblem& problem, const Eigen::Ref<const Vector>& lambda);

enum class RoundingMode { Ceiling, Efficient };

struct RoundSchedule {
  std::vector<std::int64_t> counts;
  std::int64_t total = 0;
  RoundingMode mode = RoundingMode::Ceiling;
};

/// Ceiling: counts_v = ceil(budget * lambda_v) on the support.
/// Efficient: Pukelsheim-Rieder efficient apportionment, summing to
/// exactly floor(budget).
RoundSchedule round_design(const Design& design, double budget,
                           RoundingMode mode = RoundingMode::Ceiling);

/// max_v v^T (sum_x counts_x x x^T / variance_x)^{-1} v.
double schedule_value(const DesignProblem& problem, const RoundSchedule& schedule);

}  // namespace hetbandit

#endif  // HETBANDIT_DESIGN_HPP
