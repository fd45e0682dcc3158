#include "hetbandit/varest.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hetbandit/regression.hpp"

namespace hetbandit {

namespace {

constexpr double kRankThreshold = 1e-10;

Index lifted_rank(const Matrix& lifted) {
  Eigen::ColPivHouseholderQR<Matrix> qr(lifted.transpose());
  qr.setThreshold(kRankThreshold);
  return qr.rank();
}

// Least squares of per-pull squared residuals on the lifted arms. Arm i
// contributes n_i identical rows phi_i with responses r_it, which is the
// same problem as one row sqrt(n_i) phi_i with response sqrt(n_i) mean_t r_it.
struct LiftedFit {
  Matrix sigma_hat;
  bool rank_deficient = false;
};

LiftedFit regress_lifted(const Matrix& lifted, const std::vector<std::int64_t>& counts,
                         const Vector& mean_sq_residual, Index d) {
  const Index m = lifted_dimension(d);
  std::vector<Index> used;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i] > 0) used.push_back(static_cast<Index>(i));
  Matrix rows(static_cast<Index>(used.size()), m);
  Vector rhs(static_cast<Index>(used.size()));
  for (std::size_t k = 0; k < used.size(); ++k) {
    const Index i = used[k];
    const double root = std::sqrt(static_cast<double>(counts[static_cast<std::size_t>(i)]));
    rows.row(static_cast<Index>(k)) = root * lifted.row(i);
    rhs(static_cast<Index>(k)) = root * mean_sq_residual(i);
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(rows);
  cod.setThreshold(kRankThreshold);
  LiftedFit fit;
  fit.rank_deficient = cod.rank() < m;
  fit.sigma_hat = unvech(cod.solve(rhs), d);
  return fit;
}

std::int64_t even_budget(std::int64_t gamma) {
  if (gamma % 2 != 0) {
    warn("budget " + std::to_string(gamma) + " is odd; using " + std::to_string(gamma - 1));
    --gamma;
  }
  return gamma;
}

// Pulls a schedule and keeps per-arm running moments of the responses.
std::vector<RunningMoments> collect(Environment& env, const RoundSchedule& schedule) {
  std::vector<RunningMoments> stats(schedule.counts.size());
  env.sample_schedule(schedule, [&](Index arm, double y) {
    stats[static_cast<std::size_t>(arm)].push(y);
  });
  return stats;
}

// Per-arm mean of (y - x^T theta)^2, from the running moments.
Vector mean_squared_residuals(const Matrix& arms, const std::vector<RunningMoments>& stats,
                              const Vector& theta) {
  Vector out = Vector::Zero(arms.rows());
  for (Index i = 0; i < arms.rows(); ++i) {
    const auto& s = stats[static_cast<std::size_t>(i)];
    if (s.count == 0) continue;
    const double shift = s.mean - arms.row(i).dot(theta);
    out(i) = s.m2 / static_cast<double>(s.count) + shift * shift;
  }
  return out;
}

void check_env(const HeteroInstance& inst, const Environment& env) {
  if (env.num_arms() != inst.num_arms() || env.dimension() != inst.dimension())
    throw Error(ErrorCode::DimensionMismatch, "environment does not match the instance arms");
}

}  // namespace

VarianceEstimate head_estimate(const HeteroInstance& inst, Environment& env, std::int64_t gamma,
                               const HeadOptions& options) {
  check_env(inst, env);
  if (gamma < 2) throw Error(ErrorCode::InsufficientBudget, "HEAD needs a budget of at least 2");
  gamma = even_budget(gamma);
  const double half = static_cast<double>(gamma / 2);
  const Matrix& arms = inst.arms();
  const Index d = inst.dimension();

  // Stage 1: G-optimal design on the arms, OLS mean estimate.
  const Design mean_design = solve_design(DesignProblem::g_optimal(arms, options.design_tolerance));
  if (half < static_cast<double>(mean_design.support_size))
    throw Error(ErrorCode::InsufficientBudget,
                "half budget is smaller than the support of the mean design");
  const RoundSchedule mean_schedule = round_design(mean_design, half, options.rounding);
  env.begin_stage(stage_tag::kHeadMean);
  const auto mean_stats = collect(env, mean_schedule);
  WlsAccumulator ols(d);
  for (Index i = 0; i < arms.rows(); ++i) {
    const auto& s = mean_stats[static_cast<std::size_t>(i)];
    ols.add_repeated(arms.row(i).transpose(), s.count, s.sum());
  }
  const Vector theta_hat = ols.solve();

  // Stage 2: G-optimal design on the lifted arms, fresh observations.
  const Matrix lifted = lift_rows(arms);
  const Design var_design =
      solve_design(DesignProblem::g_optimal(lifted, options.design_tolerance));
  if (half < static_cast<double>(var_design.support_size))
    throw Error(ErrorCode::InsufficientBudget,
                "half budget is smaller than the support of the lifted design");
  const RoundSchedule var_schedule = round_design(var_design, half, options.rounding);
  env.begin_stage(stage_tag::kHeadVariance);
  const auto var_stats = collect(env, var_schedule);
  const Vector residuals = mean_squared_residuals(arms, var_stats, theta_hat);
  const LiftedFit fit = regress_lifted(lifted, var_schedule.counts, residuals, d);

  VarianceEstimate est =
      VarianceEstimate::from_sigma(fit.sigma_hat, inst, EstimatorKind::Head, gamma);
  est.rank_deficient = fit.rank_deficient || lifted_rank(lifted) < lifted_dimension(d);
  est.pulls = mean_schedule.total + var_schedule.total;
  est.theta_hat = theta_hat;
  return est;
}

VarianceEstimate uniform_estimate(const HeteroInstance& inst, Environment& env,
                                  std::int64_t gamma, std::uint64_t seed) {
  check_env(inst, env);
  if (gamma <= 0) throw Error(ErrorCode::InsufficientBudget, "uniform estimator needs a positive budget");
  const Matrix& arms = inst.arms();
  const Index d = inst.dimension();
  const auto n = static_cast<std::uint64_t>(arms.rows());

  RoundSchedule schedule;
  schedule.counts.assign(static_cast<std::size_t>(n), 0);
  CounterRng picker(seed, 0, stage_tag::kUniformArmChoice);
  for (std::int64_t t = 0; t < gamma; ++t) ++schedule.counts[picker.below(n)];
  schedule.total = gamma;

  env.begin_stage(stage_tag::kUniform);
  const auto stats = collect(env, schedule);
  WlsAccumulator ols(d);
  for (Index i = 0; i < arms.rows(); ++i) {
    const auto& s = stats[static_cast<std::size_t>(i)];
    ols.add_repeated(arms.row(i).transpose(), s.count, s.sum());
  }
  bool ridged = false;
  const Vector theta_hat = ols.solve(&ridged);
  const Vector residuals = mean_squared_residuals(arms, stats, theta_hat);
  const LiftedFit fit = regress_lifted(lift_rows(arms), schedule.counts, residuals, d);

  VarianceEstimate est =
      VarianceEstimate::from_sigma(fit.sigma_hat, inst, EstimatorKind::Uniform, gamma);
  est.rank_deficient = ridged || fit.rank_deficient;
  est.pulls = gamma;
  est.theta_hat = theta_hat;
  return est;
}

std::vector<Index> separate_arm_subset(const Matrix& arms) {
  const Index m = lifted_dimension(arms.cols());
  const Matrix lifted = lift_rows(arms);
  Eigen::ColPivHouseholderQR<Matrix> qr(lifted.transpose());
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < m)
    throw Error(ErrorCode::RankDeficientLift,
                "only " + std::to_string(qr.rank()) + " of " + std::to_string(m) +
                    " lifted arms are linearly independent");
  std::vector<Index> chosen;
  const auto& perm = qr.colsPermutation().indices();
  for (Index k = 0; k < m; ++k) chosen.push_back(perm(k));
  return chosen;
}

VarianceEstimate separate_arm_estimate(const HeteroInstance& inst, Environment& env,
                                       std::int64_t gamma) {
  check_env(inst, env);
  const Matrix& arms = inst.arms();
  const Index d = inst.dimension();
  const Index m = lifted_dimension(d);
  const std::vector<Index> subset = separate_arm_subset(arms);
  const std::int64_t each = gamma / m;
  if (each < 2)
    throw Error(ErrorCode::InsufficientBudget,
                "separate-arm estimator needs at least two pulls per chosen arm");

  RoundSchedule schedule;
  schedule.counts.assign(static_cast<std::size_t>(arms.rows()), 0);
  for (Index i : subset) schedule.counts[static_cast<std::size_t>(i)] = each;
  schedule.total = each * m;

  env.begin_stage(stage_tag::kSeparateArm);
  const auto stats = collect(env, schedule);
  Matrix phi(m, m);
  Vector sample_var(m);
  for (Index k = 0; k < m; ++k) {
    const Index i = subset[static_cast<std::size_t>(k)];
    phi.row(k) = lift_phi(arms.row(i).transpose()).phi.transpose();
    const auto& s = stats[static_cast<std::size_t>(i)];
    sample_var(k) = s.m2 / static_cast<double>(s.count);
  }
  const Vector half = phi.colPivHouseholderQr().solve(sample_var);

  VarianceEstimate est =
      VarianceEstimate::from_sigma(unvech(half, d), inst, EstimatorKind::SeparateArm, gamma);
  est.pulls = schedule.total;
  return est;
}

std::int64_t head_budget_for_half(const HeteroInstance& inst, double delta, double c_prime) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  if (!(c_prime > 0.0)) throw Error(ErrorCode::InvalidArgument, "c_prime must be positive");
  const double d = static_cast<double>(inst.dimension());
  const double kappa = inst.kappa();
  const double inner =
      2.0 * c_prime * std::log(static_cast<double>(inst.num_arms()) / delta) * kappa * kappa * d * d;
  const double half = std::ceil(inner);
  if (!(half < 0.25 * static_cast<double>(std::numeric_limits<std::int64_t>::max())))
    throw Error(ErrorCode::InvalidArgument, "burn-in budget overflows");
  return 2 * std::max<std::int64_t>(1, static_cast<std::int64_t>(half));
}

double mae(const VarianceEstimate& est, const HeteroInstance& inst) {
  if (est.per_arm.size() != inst.num_arms())
    throw Error(ErrorCode::DimensionMismatch, "estimate and instance disagree on the arm count");
  return (est.per_arm - inst.arm_variances()).cwiseAbs().maxCoeff();
}

}  // namespace hetbandit
