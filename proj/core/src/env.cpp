#include "hetbandit/env.hpp"

#include <cmath>
#include <string>

namespace hetbandit {

Environment::Environment(const HeteroInstance& inst, std::uint64_t seed, std::uint32_t lane,
                         NoiseMode mode)
    : Environment(inst.arms(), inst.theta_star(), inst.sigma_star(), seed, lane, mode) {}

Environment::Environment(Matrix arms, Vector theta_star, Matrix sigma_star, std::uint64_t seed,
                         std::uint32_t lane, NoiseMode mode)
    : arms_(std::move(arms)), mode_(mode), rng_(seed, lane, 0) {
  const Index d = arms_.cols();
  if (theta_star.size() != d || sigma_star.rows() != d || sigma_star.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "environment model dimensions disagree");
  if ((sigma_star - sigma_star.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw Error(ErrorCode::InvalidInstance, "sigma_star is not symmetric");
  means_ = arms_ * theta_star;
  const Vector variances = ((arms_ * sigma_star).cwiseProduct(arms_)).rowwise().sum();
  if ((variances.array() < -1e-12).any())
    throw Error(ErrorCode::InvalidInstance, "an arm has negative noise variance");
  stddevs_ = variances.cwiseMax(0.0).cwiseSqrt();
  used_tags_.insert(0);
}

void Environment::begin_stage(std::uint32_t tag) {
  if (!used_tags_.insert(tag).second)
    throw Error(ErrorCode::InvalidArgument,
                "noise stream tag " + std::to_string(tag) + " was already used");
  rng_ = rng_.fork(tag);
}

double Environment::sample(Index arm) {
  if (arm < 0 || arm >= num_arms())
    throw Error(ErrorCode::InvalidArgument, "arm index " + std::to_string(arm) + " out of range");
  ++pull_count_;
  double y = means_(arm);
  if (mode_ == NoiseMode::Gaussian && stddevs_(arm) > 0.0) y += stddevs_(arm) * rng_.normal();
  if (logging_) log_.push_back({rng_.tag(), arm, y});
  return y;
}

void Environment::check_schedule(const RoundSchedule& schedule) const {
  if (static_cast<Index>(schedule.counts.size()) != num_arms())
    throw Error(ErrorCode::DimensionMismatch, "schedule length does not match the arm count");
  for (auto c : schedule.counts)
    if (c < 0) throw Error(ErrorCode::InvalidArgument, "schedule counts must be non-negative");
}

std::vector<Observation> Environment::sample_schedule(const RoundSchedule& schedule) {
  std::vector<Observation> out;
  out.reserve(static_cast<std::size_t>(std::max<std::int64_t>(schedule.total, 0)));
  sample_schedule(schedule, [&](Index arm, double y) { out.push_back({arm, y}); });
  return out;
}

}  // namespace hetbandit
