#include "hetbandit/regression.hpp"

namespace hetbandit {

Vector wls_estimate(const Matrix& x, const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Vector>& weights) {
  if (y.size() != x.rows() || weights.size() != x.rows())
    throw Error(ErrorCode::DimensionMismatch, "need one response and one weight per row");
  if (!(weights.array() > 0.0).all())
    throw Error(ErrorCode::InvalidArgument, "observation weights must be positive");
  WlsAccumulator acc(x.cols());
  for (Index t = 0; t < x.rows(); ++t) acc.add(x.row(t).transpose(), y(t), weights(t));
  return acc.solve();
}

WlsAccumulator::WlsAccumulator(Index dimension)
    : gram_(Matrix::Zero(dimension, dimension)), moment_(Vector::Zero(dimension)) {}

void WlsAccumulator::add(const Eigen::Ref<const Vector>& x, double y, double weight) {
  add_repeated(x, 1, y, weight);
}

void WlsAccumulator::add_repeated(const Eigen::Ref<const Vector>& x, std::int64_t count,
                                  double y_sum, double weight) {
  if (x.size() != moment_.size())
    throw Error(ErrorCode::DimensionMismatch, "observation vector has the wrong length");
  if (count <= 0) return;
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(x, weight * static_cast<double>(count));
  moment_ += (weight * y_sum) * x;
  observations_ += count;
}

Vector WlsAccumulator::solve(bool* ridged) const {
  const Matrix a = gram_.selfadjointView<Eigen::Lower>();
  const PdFactor factor(a);
  if (ridged != nullptr) *ridged = factor.ridged();
  return factor.solve(moment_);
}

}  // namespace hetbandit
