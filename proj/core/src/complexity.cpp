#include <cmath>
#include <string>

#include "hetbandit/ident.hpp"

namespace hetbandit {

const char* to_string(Objective objective) noexcept {
  return objective == Objective::BestArm ? "bai" : "ls";
}

const char* to_string(VarianceSource source) noexcept {
  return source == VarianceSource::TrueVariances ? "true" : "max";
}

IdentTask::IdentTask(HeteroInstance instance, Objective objective, double delta, double alpha)
    : instance_(std::move(instance)), objective_(objective), delta_(delta), alpha_(alpha) {
  if (!(delta > 0.0 && delta < 1.0))
    throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  if (!std::isfinite(alpha)) throw Error(ErrorCode::InvalidArgument, "alpha must be finite");
  const Matrix& z = instance_.targets();
  if (z.rows() < 1) throw Error(ErrorCode::InvalidArgument, "task needs at least one target");
  const Vector values = z * instance_.theta_star();
  if (objective_ == Objective::BestArm) {
    best_ = 0;
    for (Index i = 1; i < values.size(); ++i)
      if (values(i) > values(best_)) best_ = i;
    for (Index i = 0; i < values.size(); ++i)
      if (i != best_ && !(values(best_) - values(i) > 0.0))
        throw Error(ErrorCode::DegenerateGap,
                    "targets " + std::to_string(best_) + " and " + std::to_string(i) +
                        " tie for the best value");
  } else {
    for (Index i = 0; i < values.size(); ++i) {
      if (values(i) == alpha_)
        throw Error(ErrorCode::DegenerateGap,
                    "target " + std::to_string(i) + " sits exactly on the threshold");
      if (values(i) > alpha_) above_.push_back(i);
    }
  }
}

Matrix IdentTask::verification_directions() const {
  const Matrix& z = instance_.targets();
  if (objective_ == Objective::LevelSet) return z;
  Matrix out(z.rows() - 1, z.cols());
  Index row = 0;
  for (Index i = 0; i < z.rows(); ++i)
    if (i != best_) out.row(row++) = z.row(best_) - z.row(i);
  return out;
}

Vector IdentTask::verification_gaps() const {
  const Vector values = instance_.targets() * instance_.theta_star();
  if (objective_ == Objective::LevelSet) return (values.array() - alpha_).abs().matrix();
  Vector out(values.size() - 1);
  Index row = 0;
  for (Index i = 0; i < values.size(); ++i)
    if (i != best_) out(row++) = values(best_) - values(i);
  return out;
}

double gap_delta(const IdentTask& task) {
  const Vector gaps = task.verification_gaps();
  if (gaps.size() == 0)
    throw Error(ErrorCode::DegenerateGap, "a single best-arm target has no gap");
  return gaps.minCoeff();
}

double ComplexityReport::lower_bound_samples(double delta) const {
  if (!(delta > 0.0 && delta < 1.0 / 2.4))
    throw Error(ErrorCode::InvalidArgument, "lower bound needs delta in (0, 1/2.4)");
  return 2.0 * psi_star * std::log(1.0 / (2.4 * delta));
}

namespace {

DesignProblem verification_problem(const IdentTask& task, const Vector& variances,
                                   double tolerance) {
  const Vector gaps = task.verification_gaps();
  if (gaps.size() == 0)
    throw Error(ErrorCode::DegenerateGap, "a single best-arm target has nothing to verify");
  if (!(gaps.array() > 0.0).all())
    throw Error(ErrorCode::DegenerateGap, "a verification pair has zero gap", gaps.minCoeff());
  DesignProblem p;
  p.sample_vectors = task.instance().arms();
  p.eval_vectors = gaps.cwiseInverse().asDiagonal() * task.verification_directions();
  p.variances = variances;
  p.tolerance = tolerance;
  return p;
}

}  // namespace

ComplexityReport psi_star(const IdentTask& task, const Eigen::Ref<const Vector>& variances,
                          double tolerance) {
  const HeteroInstance& inst = task.instance();
  if (variances.size() != inst.num_arms())
    throw Error(ErrorCode::DimensionMismatch, "need one variance per arm");
  ComplexityReport report;
  report.psi_design = solve_design(verification_problem(task, variances, tolerance));
  report.psi_star = report.psi_design.value;
  report.rho_design =
      solve_design(verification_problem(task, Vector::Ones(inst.num_arms()), tolerance));
  report.rho_star = inst.sigma_max_sq() * report.rho_design.value;
  return report;
}

Vector oracle_variances(const HeteroInstance& inst, VarianceSource source) {
  if (source == VarianceSource::TrueVariances) return inst.arm_variances();
  return Vector::Constant(inst.num_arms(), inst.sigma_max_sq());
}

double hrage_tau(double design_value, int round, Index num_targets, double delta) {
  const double eps = std::ldexp(1.0, -round);
  const double l = static_cast<double>(round);
  return 3.0 * design_value / (eps * eps) *
         std::log(8.0 * l * l * static_cast<double>(num_targets) / delta);
}

double rage_tau(double design_value, double sigma_max_sq, int round, Index num_targets,
                double delta) {
  const double eps = std::ldexp(1.0, -round);
  const double l = static_cast<double>(round);
  return 2.0 * sigma_max_sq * design_value / (eps * eps) *
         std::log(8.0 * l * l * static_cast<double>(num_targets) / delta);
}

}  // namespace hetbandit
