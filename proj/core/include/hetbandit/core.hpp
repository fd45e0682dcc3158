#ifndef HETBANDIT_CORE_HPP
#define HETBANDIT_CORE_HPP

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "hetbandit/error.hpp"

namespace hetbandit {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Length of the half-vectorization of a symmetric d x d matrix.
constexpr Index lifted_dimension(Index d) noexcept { return d * (d + 1) / 2; }

/// Ground truth of a heteroskedastic linear response problem.
///
/// Arms and targets are stored one vector per row. Every arm's noise
/// variance x^T Sigma x must sit inside [sigma_min_sq, sigma_max_sq] and the
/// arms must span R^d; construction throws InvalidInstance otherwise.
class HeteroInstance {
 public:
  HeteroInstance(Matrix arms, Matrix targets, Vector theta_star,
                 Matrix sigma_star, double sigma_min_sq, double sigma_max_sq);

  /// Bounds taken as the min and max of x^T Sigma x over the arms.
  static HeteroInstance with_tight_bounds(Matrix arms, Matrix targets,
                                          Vector theta_star, Matrix sigma_star);

  Index dimension() const noexcept { return theta_star_.size(); }
  Index num_arms() const noexcept { return arms_.rows(); }
  Index num_targets() const noexcept { return targets_.rows(); }

  const Matrix& arms() const noexcept { return arms_; }
  const Matrix& targets() const noexcept { return targets_; }
  const Vector& theta_star() const noexcept { return theta_star_; }
  const Matrix& sigma_star() const noexcept { return sigma_star_; }
  double sigma_min_sq() const noexcept { return sigma_min_sq_; }
  double sigma_max_sq() const noexcept { return sigma_max_sq_; }
  double kappa() const noexcept { return sigma_max_sq_ / sigma_min_sq_; }

  /// x^T Sigma* x for every arm, in arm order.
  const Vector& arm_variances() const noexcept { return arm_variances_; }

 private:
  Matrix arms_;
  Matrix targets_;
  Vector theta_star_;
  Matrix sigma_star_;
  double sigma_min_sq_;
  double sigma_max_sq_;
  Vector arm_variances_;
};

struct LiftedArm {
  Vector phi;
  Index source_index = 0;
};

/// phi_x with x_i^2 on diagonal slots and 2 x_i x_j off the diagonal, in
/// column-major lower-triangle order, so phi_x . vech(S) = x^T S x.
LiftedArm lift_phi(const Eigen::Ref<const Vector>& x, Index source_index = 0);

/// Row-wise lift of a stacked vector matrix.
Matrix lift_rows(const Matrix& vectors);

Vector vech(const Matrix& symmetric);
Matrix unvech(const Eigen::Ref<const Vector>& half, Index d);

/// A(lambda) = sum_v lambda_v v v^T / variance_v, vectors one per row.
Matrix info_matrix(const Matrix& vectors, const Eigen::Ref<const Vector>& lambda,
                   const Eigen::Ref<const Vector>& variances);

/// Cholesky factor of a symmetric positive definite matrix. When the plain
/// factorization fails (or its smallest pivot is numerically zero) a ridge of
/// 1e-10 * trace(A) / k is added to the diagonal and the factorization is
/// retried; if that also fails SingularInformation is thrown with the
/// smallest pivot as detail.
class PdFactor {
 public:
  explicit PdFactor(const Matrix& a);

  Index size() const noexcept { return llt_.matrixLLT().rows(); }
  bool ridged() const noexcept { return ridge_ > 0.0; }
  double ridge() const noexcept { return ridge_; }

  Vector solve(const Eigen::Ref<const Vector>& b) const { return llt_.solve(b); }
  Matrix solve_matrix(const Matrix& b) const { return llt_.solve(b); }
  Matrix inverse() const;

  /// v^T A^{-1} v, computed as the squared norm of L^{-1} v.
  double quad_form_inv(const Eigen::Ref<const Vector>& v) const;

 private:
  Eigen::LLT<Matrix> llt_;
  double ridge_ = 0.0;
};

double quad_form_inv(const Matrix& a, const Eigen::Ref<const Vector>& v);

double clamp_variance(double raw, double sigma_min_sq, double sigma_max_sq);
double clamp_variance(double raw, const HeteroInstance& inst);

/// Probability vector over a finite vector set plus its minimax value.
struct Design {
  Vector weights;
  double value = 0.0;
  /// Best certified lower bound on the optimal value found by the solver.
  double lower_bound = 0.0;
  Index support_size = 0;
  bool certified = false;
  int iterations = 0;
};

enum class EstimatorKind { Head, Uniform, SeparateArm, OracleTruth };

const char* to_string(EstimatorKind kind) noexcept;

struct VarianceEstimate {
  Matrix sigma_hat;
  /// clamp(x^T sigma_hat x) per arm index.
  Vector per_arm;
  std::int64_t budget_used = 0;
  /// Pulls actually drawn (ceiling rounding can exceed the budget).
  std::int64_t pulls = 0;
  EstimatorKind kind = EstimatorKind::OracleTruth;
  bool rank_deficient = false;
  /// Mean estimate used to form residuals, when the estimator has one.
  std::optional<Vector> theta_hat;

  static VarianceEstimate from_sigma(Matrix sigma_hat, const HeteroInstance& inst,
                                     EstimatorKind kind, std::int64_t budget);
  static VarianceEstimate oracle_truth(const HeteroInstance& inst);
};

}  // namespace hetbandit

#endif  // HETBANDIT_CORE_HPP
