#ifndef HETBANDIT_IDENT_HPP
#define HETBANDIT_IDENT_HPP

#include <cstdint>
#include <limits>
#include <vector>

#include "hetbandit/core.hpp"
#include "hetbandit/design.hpp"
#include "hetbandit/env.hpp"
#include "hetbandit/regression.hpp"

namespace hetbandit {

enum class Objective { BestArm, LevelSet };

const char* to_string(Objective objective) noexcept;

/// Identification problem over the targets of an instance. Best-arm tasks
/// need a unique maximizer of z^T theta*; level-set tasks need every target
/// off the threshold. Construction throws DegenerateGap otherwise.
class IdentTask {
 public:
  IdentTask(HeteroInstance instance, Objective objective, double delta, double alpha = 0.0);

  const HeteroInstance& instance() const noexcept { return instance_; }
  Objective objective() const noexcept { return objective_; }
  double delta() const noexcept { return delta_; }
  double alpha() const noexcept { return alpha_; }

  /// Index of the best target (best-arm tasks).
  Index best_target() const noexcept { return best_; }
  /// Targets strictly above the threshold (level-set tasks), ascending.
  const std::vector<Index>& above_threshold() const noexcept { return above_; }

  /// Rows (h - q) over the pairs that must be verified: z* - z for every
  /// z != z* (best arm), every z (level set).
  Matrix verification_directions() const;
  /// (h - q)^T theta* - b for the same rows; all positive.
  Vector verification_gaps() const;

 private:
  HeteroInstance instance_;
  Objective objective_;
  double delta_;
  double alpha_;
  Index best_ = -1;
  std::vector<Index> above_;
};

/// Minimum gap: min over z != z* of (z* - z)^T theta* for best arm,
/// min over z of |z^T theta* - alpha| for level set.
double gap_delta(const IdentTask& task);

struct ComplexityReport {
  /// min_lambda max_{h,q} ||h - q||^2_{A(lambda)^-1} / gap^2 with the given
  /// per-arm variances.
  double psi_star = 0.0;
  /// sigma_max^2 times the same functional with unit variances.
  double rho_star = 0.0;
  Design psi_design;
  Design rho_design;

  double ratio() const noexcept { return psi_star / rho_star; }
  /// 2 psi* log(1 / (2.4 delta)).
  double lower_bound_samples(double delta) const;
};

/// Computes both complexity functionals. `variances` holds one value per
/// arm. The solver tolerance defaults tighter than round designs because
/// ratios of the two values are compared against exact bounds.
ComplexityReport psi_star(const IdentTask& task, const Eigen::Ref<const Vector>& variances,
                          double tolerance = 1e-4);

struct RoundRecord {
  int round = 0;
  double epsilon = 0.0;
  double tau = 0.0;
  /// Number of active targets at the start of the round.
  Index active = 0;
  std::vector<Index> active_indices;
  std::int64_t pulls = 0;
  double design_value = 0.0;
  bool design_certified = false;
};

struct RunTrace {
  std::vector<RoundRecord> rounds;
  std::int64_t burn_in_pulls = 0;
  std::int64_t total_pulls = 0;
  /// Target indices: the surviving best arm, or the set judged above the
  /// threshold. Holds the still-active set when the run did not terminate.
  std::vector<Index> answer;
  /// Level-set runs: targets judged below the threshold.
  std::vector<Index> below;
  bool correct = false;
  bool terminated = false;
};

struct IdentConfig {
  /// Burn-in constant. The default is the theoretical one, which is very
  /// conservative; simulations usually pass 1.
  double c_prime = 6000.0;
  double fw_tolerance = 1e-3;
  int max_rounds = 40;
  /// Stops a run (terminated = false) once its pulls exceed this.
  std::int64_t max_total_pulls = std::numeric_limits<std::int64_t>::max() / 4;
};

/// Noise stream tags used by the identification runs.
namespace stage_tag {
inline constexpr std::uint32_t kRoundBase = 1000;
inline constexpr std::uint32_t kOracleBase = 2000;
}  // namespace stage_tag

/// Adaptive elimination with a HEAD burn-in and weighted designs / WLS.
RunTrace hrage_run(const IdentTask& task, Environment& env, const IdentConfig& config = {});

/// Adaptive elimination with unweighted designs, OLS and sigma_max^2 scaling.
RunTrace rage_run(const IdentTask& task, Environment& env, const IdentConfig& config = {});

/// Sample sizes of round `round` for the two elimination schemes.
double hrage_tau(double design_value, int round, Index num_targets, double delta);
double rage_tau(double design_value, double sigma_max_sq, int round, Index num_targets,
                double delta);

enum class VarianceSource { TrueVariances, MaxVariance };

const char* to_string(VarianceSource source) noexcept;

/// Per-arm variances an oracle allocation is computed with.
Vector oracle_variances(const HeteroInstance& inst, VarianceSource source);

/// Fixed-design run with the oracle allocation. Starts with
/// T = ceil(2 psi log(2|Z|/delta)) pulls and doubles the cumulative budget
/// until every verification pair satisfies
///   |(h-q)^T (theta* - theta_hat)| <= sqrt(2 ||h-q||^2_V log(2|Z|/delta)) <= gap,
/// with V the covariance of the weighted estimate. Gives up at 64 T.
RunTrace oracle_run(const IdentTask& task, Environment& env, VarianceSource source,
                    double tolerance = 1e-4);

}  // namespace hetbandit

#endif  // HETBANDIT_IDENT_HPP
