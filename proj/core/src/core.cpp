#include "hetbandit/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hetbandit {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kEigenTol = 1e-10;

Index arm_rank(const Matrix& arms) {
  Eigen::ColPivHouseholderQR<Matrix> qr(arms);
  qr.setThreshold(1e-10);
  return qr.rank();
}

}  // namespace

HeteroInstance::HeteroInstance(Matrix arms, Matrix targets, Vector theta_star,
                               Matrix sigma_star, double sigma_min_sq,
                               double sigma_max_sq)
    : arms_(std::move(arms)),
      targets_(std::move(targets)),
      theta_star_(std::move(theta_star)),
      sigma_star_(std::move(sigma_star)),
      sigma_min_sq_(sigma_min_sq),
      sigma_max_sq_(sigma_max_sq) {
  const Index d = theta_star_.size();
  if (d < 1) throw Error(ErrorCode::InvalidInstance, "dimension must be positive");
  if (arms_.rows() < 1 || arms_.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "arms must be a non-empty n x d matrix");
  if (targets_.rows() < 1 || targets_.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "targets must be a non-empty m x d matrix");
  if (sigma_star_.rows() != d || sigma_star_.cols() != d)
    throw Error(ErrorCode::DimensionMismatch, "sigma_star must be d x d");
  if (!(sigma_min_sq_ > 0.0) || !(sigma_max_sq_ >= sigma_min_sq_))
    throw Error(ErrorCode::InvalidInstance, "need 0 < sigma_min_sq <= sigma_max_sq");
  if ((sigma_star_ - sigma_star_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol)
    throw Error(ErrorCode::InvalidInstance, "sigma_star is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_star_, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -kEigenTol)
    throw Error(ErrorCode::InvalidInstance, "sigma_star is not positive semi-definite",
                eig.eigenvalues().minCoeff());
  if (arm_rank(arms_) != d)
    throw Error(ErrorCode::InvalidInstance, "arms do not span R^d");

  arm_variances_ = ((arms_ * sigma_star_).cwiseProduct(arms_)).rowwise().sum();
  const double slack = 1e-12 * (1.0 + sigma_max_sq_);
  for (Index i = 0; i < arm_variances_.size(); ++i) {
    const double v = arm_variances_(i);
    if (v < sigma_min_sq_ - slack || v > sigma_max_sq_ + slack)
      throw Error(ErrorCode::InvalidInstance,
                  "arm " + std::to_string(i) + " has variance outside the bounds", v);
  }
}

HeteroInstance HeteroInstance::with_tight_bounds(Matrix arms, Matrix targets,
                                                 Vector theta_star,
                                                 Matrix sigma_star) {
  if (arms.cols() != sigma_star.rows() || sigma_star.rows() != sigma_star.cols())
    throw Error(ErrorCode::DimensionMismatch, "arms and sigma_star disagree on d");
  const Vector v = ((arms * sigma_star).cwiseProduct(arms)).rowwise().sum();
  const double lo = v.minCoeff();
  const double hi = v.maxCoeff();
  return HeteroInstance(std::move(arms), std::move(targets), std::move(theta_star),
                        std::move(sigma_star), lo, hi);
}

LiftedArm lift_phi(const Eigen::Ref<const Vector>& x, Index source_index) {
  const Index d = x.size();
  LiftedArm out{Vector(lifted_dimension(d)), source_index};
  Index k = 0;
  for (Index j = 0; j < d; ++j) {
    out.phi(k++) = x(j) * x(j);
    for (Index i = j + 1; i < d; ++i) out.phi(k++) = 2.0 * x(i) * x(j);
  }
  return out;
}

Matrix lift_rows(const Matrix& vectors) {
  Matrix out(vectors.rows(), lifted_dimension(vectors.cols()));
  for (Index r = 0; r < vectors.rows(); ++r)
    out.row(r) = lift_phi(vectors.row(r).transpose(), r).phi.transpose();
  return out;
}

Vector vech(const Matrix& symmetric) {
  const Index d = symmetric.rows();
  if (symmetric.cols() != d) throw Error(ErrorCode::DimensionMismatch, "vech needs a square matrix");
  Vector out(lifted_dimension(d));
  Index k = 0;
  for (Index j = 0; j < d; ++j)
    for (Index i = j; i < d; ++i) out(k++) = symmetric(i, j);
  return out;
}

Matrix unvech(const Eigen::Ref<const Vector>& half, Index d) {
  if (half.size() != lifted_dimension(d))
    throw Error(ErrorCode::DimensionMismatch, "unvech length does not match d(d+1)/2");
  Matrix out(d, d);
  Index k = 0;
  for (Index j = 0; j < d; ++j)
    for (Index i = j; i < d; ++i) {
      out(i, j) = half(k);
      out(j, i) = half(k);
      ++k;
    }
  return out;
}

Matrix info_matrix(const Matrix& vectors, const Eigen::Ref<const Vector>& lambda,
                   const Eigen::Ref<const Vector>& variances) {
  if (lambda.size() != vectors.rows() || variances.size() != vectors.rows())
    throw Error(ErrorCode::DimensionMismatch,
                "design and variances must have one entry per vector");
  if ((variances.array() <= 0.0).any())
    throw Error(ErrorCode::InvalidArgument, "variances must be strictly positive");
  const Vector scale = lambda.cwiseQuotient(variances);
  Matrix out = vectors.transpose() * scale.asDiagonal() * vectors;
  return 0.5 * (out + out.transpose());
}

PdFactor::PdFactor(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw Error(ErrorCode::DimensionMismatch, "PdFactor needs a non-empty square matrix");
  const double scale = std::max(a.diagonal().cwiseAbs().maxCoeff(), 0.0);

  auto acceptable = [&](const Eigen::LLT<Matrix>& llt) {
    if (llt.info() != Eigen::Success) return false;
    const double pivot = llt.matrixLLT().diagonal().minCoeff();
    return std::isfinite(pivot) && pivot * pivot > 1e-14 * scale;
  };

  llt_.compute(a);
  if (acceptable(llt_)) return;

  const Index k = a.rows();
  ridge_ = 1e-10 * a.trace() / static_cast<double>(k);
  if (ridge_ > 0.0) {
    Matrix ridged = a;
    ridged.diagonal().array() += ridge_;
    llt_.compute(ridged);
    if (llt_.info() == Eigen::Success &&
        llt_.matrixLLT().diagonal().minCoeff() > 0.0)
      return;
  }
  Eigen::LDLT<Matrix> ldlt(a);
  const double pivot = ldlt.vectorD().minCoeff();
  throw Error(ErrorCode::SingularInformation,
              "information matrix is singular beyond the ridge tolerance", pivot);
}

Matrix PdFactor::inverse() const {
  return llt_.solve(Matrix::Identity(size(), size()));
}

double PdFactor::quad_form_inv(const Eigen::Ref<const Vector>& v) const {
  if (v.size() != size()) throw Error(ErrorCode::DimensionMismatch, "vector length mismatch");
  const Vector w = llt_.matrixL().solve(v);
  return w.squaredNorm();
}

double quad_form_inv(const Matrix& a, const Eigen::Ref<const Vector>& v) {
  return PdFactor(a).quad_form_inv(v);
}

double clamp_variance(double raw, double sigma_min_sq, double sigma_max_sq) {
  return std::min(std::max(raw, sigma_min_sq), sigma_max_sq);
}

double clamp_variance(double raw, const HeteroInstance& inst) {
  return clamp_variance(raw, inst.sigma_min_sq(), inst.sigma_max_sq());
}

const char* to_string(EstimatorKind kind) noexcept {
  switch (kind) {
    case EstimatorKind::Head: return "head";
    case EstimatorKind::Uniform: return "uniform";
    case EstimatorKind::SeparateArm: return "separate";
    case EstimatorKind::OracleTruth: return "oracle";
  }
  return "unknown";
}

VarianceEstimate VarianceEstimate::from_sigma(Matrix sigma_hat,
                                              const HeteroInstance& inst,
                                              EstimatorKind kind,
                                              std::int64_t budget) {
  VarianceEstimate est;
  const Matrix& x = inst.arms();
  const Vector raw = ((x * sigma_hat).cwiseProduct(x)).rowwise().sum();
  est.per_arm = raw.unaryExpr([&](double r) { return clamp_variance(r, inst); });
  est.sigma_hat = std::move(sigma_hat);
  est.kind = kind;
  est.budget_used = budget;
  return est;
}

VarianceEstimate VarianceEstimate::oracle_truth(const HeteroInstance& inst) {
  return from_sigma(inst.sigma_star(), inst, EstimatorKind::OracleTruth, 0);
}

}  // namespace hetbandit
