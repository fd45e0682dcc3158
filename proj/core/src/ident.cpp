#include "hetbandit/ident.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "hetbandit/varest.hpp"

namespace hetbandit {

namespace {

// Rows the round design must cover: pairwise differences of the active
// targets (best arm) or the active targets themselves (level set).
Matrix round_directions(const IdentTask& task, const std::vector<Index>& active) {
  const Matrix& z = task.instance().targets();
  if (task.objective() == Objective::LevelSet) {
    Matrix out(static_cast<Index>(active.size()), z.cols());
    for (std::size_t k = 0; k < active.size(); ++k) out.row(static_cast<Index>(k)) = z.row(active[k]);
    return out;
  }
  const auto k = static_cast<Index>(active.size());
  Matrix out(k * (k - 1) / 2, z.cols());
  Index row = 0;
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = i + 1; j < active.size(); ++j)
      out.row(row++) = z.row(active[i]) - z.row(active[j]);
  return out;
}

// Per-arm response sums of one pull schedule.
struct ArmSums {
  std::vector<std::int64_t> counts;
  std::vector<double> sums;
};

void pull_into(Environment& env, const std::vector<std::int64_t>& counts, ArmSums& acc) {
  RoundSchedule schedule;
  schedule.counts = counts;
  for (auto c : counts) schedule.total += c;
  env.sample_schedule(schedule, [&](Index arm, double y) {
    acc.sums[static_cast<std::size_t>(arm)] += y;
  });
  for (std::size_t i = 0; i < counts.size(); ++i) acc.counts[i] += counts[i];
}

ArmSums empty_sums(Index arms) {
  ArmSums s;
  s.counts.assign(static_cast<std::size_t>(arms), 0);
  s.sums.assign(static_cast<std::size_t>(arms), 0.0);
  return s;
}

Vector weighted_estimate(const Matrix& arms, const ArmSums& data, const Vector& variances) {
  WlsAccumulator acc(arms.cols());
  for (Index i = 0; i < arms.rows(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    acc.add_repeated(arms.row(i).transpose(), data.counts[k], data.sums[k], 1.0 / variances(i));
  }
  return acc.solve();
}

bool is_correct(const IdentTask& task, const RunTrace& trace) {
  if (task.objective() == Objective::BestArm)
    return trace.answer.size() == 1 && trace.answer.front() == task.best_target();
  return trace.answer == task.above_threshold();
}

using TauRule = std::function<double(double design_value, int round)>;

// Shared elimination skeleton. `variances` weight both the round designs and
// the estimator; constant variances give the unweighted design and OLS.
RunTrace eliminate(const IdentTask& task, Environment& env, const IdentConfig& config,
                   const Vector& variances, const TauRule& tau_rule, RunTrace trace) {
  const HeteroInstance& inst = task.instance();
  const Matrix& arms = inst.arms();
  const Matrix& targets = inst.targets();
  const bool best_arm = task.objective() == Objective::BestArm;

  std::vector<Index> active(static_cast<std::size_t>(targets.rows()));
  for (std::size_t i = 0; i < active.size(); ++i) active[i] = static_cast<Index>(i);
  std::vector<Index> above, below;

  auto finished = [&] { return best_arm ? active.size() <= 1 : active.empty(); };

  for (int round = 1; round <= config.max_rounds && !finished(); ++round) {
    const double eps = std::ldexp(1.0, -round);
    DesignProblem problem;
    problem.sample_vectors = arms;
    problem.eval_vectors = round_directions(task, active);
    problem.variances = variances;
    problem.tolerance = config.fw_tolerance;
    const Design design = solve_design(problem);
    const double tau = tau_rule(design.value, round);
    const RoundSchedule schedule = round_design(design, std::max(tau, 1.0));
    if (schedule.total > config.max_total_pulls - trace.total_pulls) break;

    RoundRecord record;
    record.round = round;
    record.epsilon = eps;
    record.tau = tau;
    record.active = static_cast<Index>(active.size());
    record.active_indices = active;
    record.pulls = schedule.total;
    record.design_value = design.value;
    record.design_certified = design.certified;

    env.begin_stage(stage_tag::kRoundBase + static_cast<std::uint32_t>(round));
    ArmSums data = empty_sums(arms.rows());
    pull_into(env, schedule.counts, data);
    trace.total_pulls += schedule.total;
    trace.rounds.push_back(std::move(record));

    const Vector theta_hat = weighted_estimate(arms, data, variances);
    std::vector<Index> next;
    if (best_arm) {
      double top = -std::numeric_limits<double>::infinity();
      for (Index i : active) top = std::max(top, targets.row(i).dot(theta_hat));
      for (Index i : active)
        if (!(top - targets.row(i).dot(theta_hat) > eps)) next.push_back(i);
    } else {
      for (Index i : active) {
        const double v = targets.row(i).dot(theta_hat);
        if (v - eps > task.alpha()) above.push_back(i);
        else if (v + eps < task.alpha()) below.push_back(i);
        else next.push_back(i);
      }
    }
    active = std::move(next);
  }

  trace.terminated = finished();
  if (best_arm) {
    trace.answer = active;
  } else {
    std::sort(above.begin(), above.end());
    std::sort(below.begin(), below.end());
    trace.answer = trace.terminated ? above : active;
    trace.below = below;
  }
  trace.correct = trace.terminated && is_correct(task, trace);
  return trace;
}

}  // namespace

RunTrace hrage_run(const IdentTask& task, Environment& env, const IdentConfig& config) {
  const HeteroInstance& inst = task.instance();
  RunTrace trace;
  if (task.objective() == Objective::BestArm && inst.num_targets() == 1) {
    trace.answer = {0};
    trace.terminated = trace.correct = true;
    return trace;
  }
  const std::int64_t gamma = head_budget_for_half(inst, task.delta(), config.c_prime);
  const VarianceEstimate burn_in = head_estimate(inst, env, gamma);
  trace.burn_in_pulls = burn_in.pulls;
  trace.total_pulls = burn_in.pulls;
  const Index num_targets = inst.num_targets();
  const double delta = task.delta();
  return eliminate(task, env, config, burn_in.per_arm,
                   [&](double q, int round) { return hrage_tau(q, round, num_targets, delta); },
                   std::move(trace));
}

RunTrace rage_run(const IdentTask& task, Environment& env, const IdentConfig& config) {
  const HeteroInstance& inst = task.instance();
  RunTrace trace;
  if (task.objective() == Objective::BestArm && inst.num_targets() == 1) {
    trace.answer = {0};
    trace.terminated = trace.correct = true;
    return trace;
  }
  const Index num_targets = inst.num_targets();
  const double delta = task.delta();
  const double smax = inst.sigma_max_sq();
  return eliminate(task, env, config, Vector::Ones(inst.num_arms()),
                   [&](double q, int round) { return rage_tau(q, smax, round, num_targets, delta); },
                   std::move(trace));
}

RunTrace oracle_run(const IdentTask& task, Environment& env, VarianceSource source,
                    double tolerance) {
  const HeteroInstance& inst = task.instance();
  const Matrix& arms = inst.arms();
  const Matrix& targets = inst.targets();
  RunTrace trace;
  if (task.objective() == Objective::BestArm && inst.num_targets() == 1) {
    trace.answer = {0};
    trace.terminated = trace.correct = true;
    return trace;
  }

  const Vector variances = oracle_variances(inst, source);
  const ComplexityReport report = psi_star(task, variances, tolerance);
  const Design& design = report.psi_design;
  const double log_term = std::log(2.0 * static_cast<double>(inst.num_targets()) / task.delta());
  const double base = std::ceil(2.0 * design.value * log_term);
  const Matrix dirs = task.verification_directions();
  const Vector gaps = task.verification_gaps();

  ArmSums data = empty_sums(arms.rows());
  std::vector<std::int64_t> drawn(static_cast<std::size_t>(arms.rows()), 0);
  Vector theta_hat;
  for (int batch = 0; batch <= 6; ++batch) {
    const double budget = base * std::ldexp(1.0, batch);
    const RoundSchedule target = round_design(design, budget);
    std::vector<std::int64_t> extra(drawn.size());
    std::int64_t pulls = 0;
    for (std::size_t i = 0; i < drawn.size(); ++i) {
      extra[i] = std::max<std::int64_t>(0, target.counts[i] - drawn[i]);
      drawn[i] += extra[i];
      pulls += extra[i];
    }
    env.begin_stage(stage_tag::kOracleBase + static_cast<std::uint32_t>(batch));
    pull_into(env, extra, data);
    trace.total_pulls += pulls;

    RoundRecord record;
    record.round = batch + 1;
    record.tau = budget;
    record.active = inst.num_targets();
    record.pulls = pulls;
    record.design_value = design.value;
    record.design_certified = design.certified;
    trace.rounds.push_back(std::move(record));

    theta_hat = weighted_estimate(arms, data, variances);
    Vector counts(arms.rows());
    for (Index i = 0; i < arms.rows(); ++i) counts(i) = static_cast<double>(drawn[static_cast<std::size_t>(i)]);
    const PdFactor info(info_matrix(arms, counts, variances));
    const Vector error = inst.theta_star() - theta_hat;
    bool verified = true;
    for (Index p = 0; p < dirs.rows() && verified; ++p) {
      const Vector y = dirs.row(p).transpose();
      const double width = std::sqrt(2.0 * info.quad_form_inv(y) * log_term);
      verified = std::abs(y.dot(error)) <= width && width <= gaps(p);
    }
    if (verified) {
      trace.terminated = true;
      break;
    }
  }

  const Vector values = targets * theta_hat;
  if (task.objective() == Objective::BestArm) {
    Index best = 0;
    for (Index i = 1; i < values.size(); ++i)
      if (values(i) > values(best)) best = i;
    trace.answer = {best};
  } else {
    for (Index i = 0; i < values.size(); ++i) {
      if (values(i) > task.alpha()) trace.answer.push_back(i);
      else trace.below.push_back(i);
    }
  }
  trace.correct = is_correct(task, trace);
  return trace;
}

}  // namespace hetbandit
