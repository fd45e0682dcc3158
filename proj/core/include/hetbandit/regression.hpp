#ifndef HETBANDIT_REGRESSION_HPP
#define HETBANDIT_REGRESSION_HPP

#include <cstdint>

#include "hetbandit/core.hpp"

namespace hetbandit {

/// theta = (X^T W X)^{-1} X^T W y with X one observation per row and W the
/// diagonal of `weights`. All-ones weights give OLS. Falls back to the
/// ridged solve of PdFactor and throws SingularInformation beyond it.
Vector wls_estimate(const Matrix& x, const Eigen::Ref<const Vector>& y,
                    const Eigen::Ref<const Vector>& weights);

/// Streaming form of wls_estimate. Repeated pulls of the same vector can be
/// added at once through their count and response sum.
class WlsAccumulator {
 public:
  explicit WlsAccumulator(Index dimension);

  void add(const Eigen::Ref<const Vector>& x, double y, double weight = 1.0);
  void add_repeated(const Eigen::Ref<const Vector>& x, std::int64_t count, double y_sum,
                    double weight = 1.0);

  const Matrix& gram() const noexcept { return gram_; }
  const Vector& moment() const noexcept { return moment_; }
  std::int64_t observations() const noexcept { return observations_; }

  /// Solves the normal equations; `ridged` reports whether the fallback
  /// ridge was needed.
  Vector solve(bool* ridged = nullptr) const;

 private:
  Matrix gram_;
  Vector moment_;
  std::int64_t observations_ = 0;
};

/// Running count, mean and sum of squared deviations (Welford).
struct RunningMoments {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double y) noexcept {
    ++count;
    const double delta = y - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (y - mean);
  }
  double sum() const noexcept { return mean * static_cast<double>(count); }
};

}  // namespace hetbandit

#endif  // HETBANDIT_REGRESSION_HPP
