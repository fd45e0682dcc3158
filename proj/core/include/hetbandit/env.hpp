#ifndef HETBANDIT_ENV_HPP
#define HETBANDIT_ENV_HPP

#include <cstdint>
#include <set>
#include <vector>

#include "hetbandit/core.hpp"
#include "hetbandit/design.hpp"
#include "hetbandit/rng.hpp"

namespace hetbandit {

enum class NoiseMode { Gaussian, Silent };

struct Observation {
  Index arm = 0;
  double y = 0.0;
};

struct LoggedPull {
  std::uint32_t stage = 0;
  Index arm = 0;
  double y = 0.0;
};

/// Simulator of y = x^T theta* + eta, eta ~ N(0, x^T Sigma* x).
///
/// Noise is drawn from a counter-based stream keyed by the seed. Each stage
/// of an algorithm switches to its own stream tag with begin_stage(), so
/// observations in different stages come from disjoint random streams.
/// Not safe for concurrent use.
class Environment {
 public:
  Environment(const HeteroInstance& inst, std::uint64_t seed, std::uint32_t lane = 0,
              NoiseMode mode = NoiseMode::Gaussian);

  /// Raw response model. Sigma only has to be symmetric with x^T Sigma x >= 0
  /// on every arm, so degenerate (even zero) noise is allowed here.
  Environment(Matrix arms, Vector theta_star, Matrix sigma_star, std::uint64_t seed,
              std::uint32_t lane = 0, NoiseMode mode = NoiseMode::Gaussian);

  Index num_arms() const noexcept { return arms_.rows(); }
  Index dimension() const noexcept { return arms_.cols(); }
  const Matrix& arms() const noexcept { return arms_; }
  NoiseMode noise_mode() const noexcept { return mode_; }
  std::int64_t pull_count() const noexcept { return pull_count_; }
  std::uint32_t stage() const noexcept { return rng_.tag(); }

  /// Switches to a fresh noise stream. Reusing a tag throws InvalidArgument.
  void begin_stage(std::uint32_t tag);

  double sample(Index arm);

  /// Pulls arm i counts[i] times, arms in index order.
  std::vector<Observation> sample_schedule(const RoundSchedule& schedule);

  /// Same pull order as the list form, streamed to `visit(arm, y)`.
  template <typename Visitor>
  void sample_schedule(const RoundSchedule& schedule, Visitor&& visit) {
    check_schedule(schedule);
    for (std::size_t i = 0; i < schedule.counts.size(); ++i) {
      const auto arm = static_cast<Index>(i);
      for (std::int64_t k = 0; k < schedule.counts[i]; ++k) visit(arm, sample(arm));
    }
  }

  void enable_call_log(bool on = true) { logging_ = on; }
  const std::vector<LoggedPull>& call_log() const noexcept { return log_; }

 private:
  void check_schedule(const RoundSchedule& schedule) const;

  Matrix arms_;
  Vector means_;
  Vector stddevs_;
  NoiseMode mode_;
  CounterRng rng_;
  std::set<std::uint32_t> used_tags_;
  std::int64_t pull_count_ = 0;
  bool logging_ = false;
  std::vector<LoggedPull> log_;
};

}  // namespace hetbandit

#endif  // HETBANDIT_ENV_HPP
