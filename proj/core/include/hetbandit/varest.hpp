#ifndef HETBANDIT_VAREST_HPP
#define HETBANDIT_VAREST_HPP

#include <cstdint>

#include "hetbandit/core.hpp"
#include "hetbandit/design.hpp"
#include "hetbandit/env.hpp"

namespace hetbandit {

/// Noise stream tags used by the estimators. H-RAGE's burn-in reuses the
/// HEAD tags, so one Environment can host a burn-in and later rounds.
namespace stage_tag {
inline constexpr std::uint32_t kHeadMean = 1;
inline constexpr std::uint32_t kHeadVariance = 2;
inline constexpr std::uint32_t kUniform = 3;
inline constexpr std::uint32_t kSeparateArm = 4;
inline constexpr std::uint32_t kUniformArmChoice = 5;
}  // namespace stage_tag

struct HeadOptions {
  double design_tolerance = 1e-3;
  RoundingMode rounding = RoundingMode::Ceiling;
};

/// Two-stage estimator. Half the budget follows a G-optimal design on the
/// arms and gives an OLS mean estimate; the other half follows a G-optimal
/// design on the lifted arms (inside their span) and regresses squared
/// residuals against that first-stage estimate. The two halves use disjoint
/// noise streams.
///
/// Only the arms and the variance bounds of `inst` are read. An odd gamma is
/// decremented with a warning. Throws InsufficientBudget when a half budget
/// is smaller than a design's support. When the lifted arms do not span the
/// half-vectorization space the minimum-norm solution is returned and
/// rank_deficient is set.
VarianceEstimate head_estimate(const HeteroInstance& inst, Environment& env, std::int64_t gamma,
                               const HeadOptions& options = {});

/// Samples arms uniformly with replacement and reuses the same observations
/// for the mean fit and the residual regression. `seed` drives the arm
/// choice only; noise comes from `env`.
VarianceEstimate uniform_estimate(const HeteroInstance& inst, Environment& env,
                                  std::int64_t gamma, std::uint64_t seed);

/// Greedily picks d(d+1)/2 arms with the best conditioned lifted matrix
/// (largest orthogonal residual first), splits the budget evenly between
/// them and solves the square system of sample variances.
VarianceEstimate separate_arm_estimate(const HeteroInstance& inst, Environment& env,
                                       std::int64_t gamma);

/// Arm indices chosen by separate_arm_estimate, in selection order.
/// Throws RankDeficientLift when fewer than d(d+1)/2 lifted arms are
/// linearly independent.
std::vector<Index> separate_arm_subset(const Matrix& arms);

/// Smallest even budget with sqrt(c' log(|X|/delta) kappa^2 d^2 / gamma) <= 1/2,
/// i.e. 2 * ceil(2 c' log(|X|/delta) kappa^2 d^2).
std::int64_t head_budget_for_half(const HeteroInstance& inst, double delta,
                                  double c_prime = 6000.0);

/// max over arms of |per_arm - x^T Sigma* x|.
double mae(const VarianceEstimate& est, const HeteroInstance& inst);

}  // namespace hetbandit

#endif  // HETBANDIT_VAREST_HPP
