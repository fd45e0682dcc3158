#include "hetbandit/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace hetbandit {

namespace {

constexpr double kPruneThreshold = 1e-7;
constexpr double kRankThreshold = 1e-10;
constexpr int kRefreshEvery = 100;
constexpr double kDropLimit = 1e-12;

// Orthonormal coordinates for span(sample rows). When the samples span the
// ambient space the identity is kept so values are computed in the original
// basis.
struct Subspace {
  Matrix basis;  // k x r, orthonormal columns
  Index rank = 0;
  bool full = false;
};

Subspace row_space(const Matrix& rows) {
  Eigen::ColPivHouseholderQR<Matrix> qr(rows.transpose());
  qr.setThreshold(kRankThreshold);
  Subspace sub;
  sub.rank = qr.rank();
  sub.full = sub.rank == rows.cols();
  if (!sub.full) {
    Matrix q = qr.householderQ();
    sub.basis = q.leftCols(sub.rank);
  }
  return sub;
}

Matrix to_coords(const Subspace& sub, const Matrix& rows) {
  return sub.full ? rows : Matrix(rows * sub.basis);
}

// Lowest-index argmax over entries where mask is true (all when mask empty).
Index argmax(const Vector& values, const std::vector<bool>& mask = {}) {
  Index best = -1;
  for (Index i = 0; i < values.size(); ++i) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || values(i) > values(best)) best = i;
  }
  return best;
}

Index argmin(const Vector& values, const std::vector<bool>& mask) {
  Index best = -1;
  for (Index i = 0; i < values.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (best < 0 || values(i) < values(best)) best = i;
  }
  return best;
}

std::vector<bool> support_mask(const Vector& lambda) {
  std::vector<bool> mask(static_cast<std::size_t>(lambda.size()));
  for (Index i = 0; i < lambda.size(); ++i) mask[static_cast<std::size_t>(i)] = lambda(i) > 0.0;
  return mask;
}

// Uniform weights on r greedily chosen rows spanning the (r-dim) row space.
Vector spanning_start(const Matrix& scaled) {
  Eigen::ColPivHouseholderQR<Matrix> qr(scaled.transpose());
  qr.setThreshold(kRankThreshold);
  const Index r = qr.rank();
  Vector lambda = Vector::Zero(scaled.rows());
  const auto& perm = qr.colsPermutation().indices();
  for (Index i = 0; i < r; ++i) lambda(perm(i)) = 1.0 / static_cast<double>(r);
  return lambda;
}

Matrix weighted_gram(const Matrix& scaled, const Vector& lambda) {
  Matrix a = scaled.transpose() * lambda.asDiagonal() * scaled;
  return 0.5 * (a + a.transpose());
}

Index support_size(const Vector& lambda) {
  return static_cast<Index>((lambda.array() > 0.0).count());
}

// Minimizes a convex function on [0, hi] by golden-section search.
template <typename F>
double golden_section(F&& f, double hi) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0, b = hi;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 80 && (b - a) > 1e-14 * std::max(1.0, hi); ++it) {
    if (fc <= fd) {
      b = d; d = c; fd = fc;
      c = b - ratio * (b - a); fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + ratio * (b - a); fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double f0 = f(0.0), fmid = f(mid);
  return fmid < f0 ? mid : 0.0;
}

struct Step {
  Index index = -1;
  double gamma = 0.0;
  bool away = false;
};

void apply_step(Vector& lambda, const Step& step, double gamma_max) {
  if (step.away) {
    lambda *= 1.0 + step.gamma;
    lambda(step.index) -= step.gamma;
    if (step.gamma >= gamma_max) lambda(step.index) = 0.0;
  } else {
    lambda *= 1.0 - step.gamma;
    lambda(step.index) += step.gamma;
  }
  lambda = lambda.cwiseMax(0.0);
  lambda /= lambda.sum();
}

double away_limit(double weight) {
  return weight < 1.0 ? weight / (1.0 - weight) : 0.0;
}

// ----- unweighted self-evaluating problems: Wynn-Fedorov with away steps ----

Design solve_kiefer_wolfowitz(const Matrix& coords, double variance, double tol,
                              int max_iters) {
  const Index r = coords.cols();
  const double rd = static_cast<double>(r);
  const Matrix scaled = coords / std::sqrt(variance);

  Design out;
  out.lower_bound = variance * rd;
  Vector lambda = spanning_start(scaled);
  Matrix ainv;
  Vector lev;  // u_i^T A^{-1} u_i

  auto refresh = [&] {
    ainv = PdFactor(weighted_gram(scaled, lambda)).inverse();
    lev = ((scaled * ainv).cwiseProduct(scaled)).rowwise().sum();
  };
  refresh();

  int it = 0;
  for (; it < max_iters; ++it) {
    if (it > 0 && it % kRefreshEvery == 0) refresh();
    const Index j = argmax(lev);
    if (lev(j) <= rd * (1.0 + tol)) {
      out.certified = true;
      break;
    }
    const auto mask = support_mask(lambda);
    const Index a = argmin(lev, mask);
    const double toward_gap = lev(j) / rd - 1.0;
    const double away_gap = 1.0 - lev(a) / rd;

    Step step;
    double gamma_max = 1.0;
    if (toward_gap >= away_gap || lambda(a) >= 1.0) {
      step.index = j;
      step.gamma = (lev(j) / rd - 1.0) / (lev(j) - 1.0);
    } else {
      step.index = a;
      step.away = true;
      gamma_max = away_limit(lambda(a));
      step.gamma = lev(a) > 1.0 ? (rd - lev(a)) / (rd * (lev(a) - 1.0)) : gamma_max;
      step.gamma = std::min(step.gamma, gamma_max);
    }
    if (!(step.gamma > 0.0)) {
      refresh();
      continue;
    }

    // Rank-one update of A^{-1} and the leverages.
    const double s = step.away ? 1.0 + step.gamma : 1.0 - step.gamma;
    const double c = (step.away ? -step.gamma : step.gamma) / s;
    const Vector w = ainv * scaled.row(step.index).transpose();
    const double denom = 1.0 + c * lev(step.index);
    apply_step(lambda, step, gamma_max);
    if (!(denom > 1e-12)) {
      refresh();
      continue;
    }
    const Vector h = scaled * w;
    ainv = (ainv - (c / denom) * w * w.transpose()) / s;
    lev = (lev - (c / denom) * h.cwiseAbs2()) / s;
  }
  out.iterations = it;
  out.weights = lambda;
  return out;
}

// ----- general problems: smoothed-max Frank-Wolfe with away steps ----------

Design solve_smoothed(const Matrix& sample, const Matrix& eval, const Vector& variances,
                      double tol, int max_iters) {
  const Index m = eval.rows();
  const Matrix scaled = variances.cwiseSqrt().cwiseInverse().asDiagonal() * sample;
  const double log_m = std::log(static_cast<double>(m));
  const double smooth_final = tol / 4.0;
  double smooth = m > 1 ? std::max(0.05, smooth_final) : smooth_final;

  Vector lambda = spanning_start(scaled);
  Vector best_lambda = lambda;
  double best_value = std::numeric_limits<double>::infinity();
  double best_lower = 0.0;
  bool certified = false;

  int it = 0;
  for (; it < max_iters; ++it) {
    const PdFactor factor(weighted_gram(scaled, lambda));
    const Matrix g = factor.solve_matrix(eval.transpose());  // r x m
    const Vector f = (eval.transpose().cwiseProduct(g)).colwise().sum().transpose();
    const double value = f.maxCoeff();
    if (value < best_value) {
      best_value = value;
      best_lambda = lambda;
    }

    // Softmax weights over eval vectors at relative temperature `smooth`.
    Vector p = Vector::Ones(m);
    double beta = 0.0;
    if (m > 1 && value > 0.0) {
      beta = log_m / (smooth * value);
      p = (beta * (f.array() - value)).exp().matrix();
    }
    p /= p.sum();
    const double gp = p.dot(f);

    const Matrix h = scaled * g;  // h(i, v) = u_i^T A^{-1} v
    const Vector q = h.cwiseAbs2() * p;
    const Index j = argmax(q);
    if (q(j) > 0.0) best_lower = std::max(best_lower, gp * gp / q(j));
    if (best_value - best_lower <= tol * best_value) {
      certified = true;
      break;
    }

    const double toward_gap = q(j) - gp;
    if (toward_gap <= smooth * value && smooth > smooth_final)
      smooth = std::max(0.5 * smooth, smooth_final);

    // Pairwise step: move mass from the worst support point a to j.
    const auto mask = support_mask(lambda);
    const Index a = argmin(q, mask);
    if (a == j) continue;
    const double gamma_max = lambda(a);
    const Matrix ua = factor.solve_matrix(scaled.row(a).transpose());
    const double gjj = factor.quad_form_inv(scaled.row(j).transpose());
    const double gaa = scaled.row(a).dot(ua.col(0));
    const double gja = scaled.row(j).dot(ua.col(0));
    const Vector bj = h.row(j).transpose();
    const Vector ba = h.row(a).transpose();

    // f_v(gamma) for A + gamma (u_j u_j^T - u_a u_a^T) by the rank-two Woodbury identity.
    auto smoothed_at = [&](double gamma) {
      if (gamma == 0.0) {
        if (beta == 0.0) return value;
        return value + std::log((beta * (f.array() - value)).exp().sum()) / beta;
      }
      const double m11 = 1.0 / gamma + gjj, m22 = -1.0 / gamma + gaa, m12 = gja;
      const double det = m11 * m22 - m12 * m12;
      if (!(det < 0.0)) return std::numeric_limits<double>::infinity();
      const Vector fg =
          f - ((m22 * bj.cwiseAbs2() - 2.0 * m12 * bj.cwiseProduct(ba) + m11 * ba.cwiseAbs2()) /
               det);
      const double top = fg.maxCoeff();
      if (!(top > 0.0)) return std::numeric_limits<double>::infinity();
      if (beta == 0.0) return top;
      return top + std::log((beta * (fg.array() - top)).exp().sum()) / beta;
    };
    // A vanishing weight is dropped outright; line search cannot resolve
    // steps that small and would stall on it.
    const double gamma = gamma_max <= kDropLimit ? gamma_max
                                                 : golden_section(smoothed_at, gamma_max);
    if (gamma > 0.0) {
      lambda(j) += gamma;
      lambda(a) = gamma >= gamma_max ? 0.0 : lambda(a) - gamma;
    }
  }

  Design out;
  out.weights = best_lambda;
  out.value = best_value;
  out.lower_bound = best_lower;
  out.certified = certified;
  out.iterations = it;
  return out;
}

bool self_evaluating(const DesignProblem& p) {
  return p.eval_vectors.rows() == p.sample_vectors.rows() &&
         p.eval_vectors == p.sample_vectors &&
         p.variances.maxCoeff() == p.variances.minCoeff();
}

// Drops negligible weights unless that would shrink the span of the support.
Vector prune(const Vector& lambda, const Matrix& coords, Index rank) {
  Vector pruned = (lambda.array() < kPruneThreshold).select(0.0, lambda);
  if (pruned.sum() <= 0.0) return lambda;
  std::vector<Index> keep;
  for (Index i = 0; i < pruned.size(); ++i)
    if (pruned(i) > 0.0) keep.push_back(i);
  Matrix rows(static_cast<Index>(keep.size()), coords.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) rows.row(static_cast<Index>(k)) = coords.row(keep[k]);
  Eigen::ColPivHouseholderQR<Matrix> qr(rows.transpose());
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < rank) return lambda;
  return pruned / pruned.sum();
}

double value_in_coords(const Matrix& sample, const Matrix& eval, const Vector& variances,
                       const Vector& lambda) {
  const PdFactor factor(info_matrix(sample, lambda, variances));
  double best = 0.0;
  for (Index v = 0; v < eval.rows(); ++v)
    best = std::max(best, factor.quad_form_inv(eval.row(v).transpose()));
  return best;
}

}  // namespace

DesignProblem DesignProblem::g_optimal(Matrix vectors, double tolerance) {
  DesignProblem p;
  p.variances = Vector::Ones(vectors.rows());
  p.eval_vectors = vectors;
  p.sample_vectors = std::move(vectors);
  p.tolerance = tolerance;
  return p;
}

void DesignProblem::validate() const {
  if (sample_vectors.rows() < 1 || sample_vectors.cols() < 1)
    throw Error(ErrorCode::InvalidArgument, "design needs at least one sample vector");
  if (eval_vectors.rows() < 1)
    throw Error(ErrorCode::InvalidArgument, "design needs at least one eval vector");
  if (eval_vectors.cols() != sample_vectors.cols())
    throw Error(ErrorCode::DimensionMismatch, "eval and sample vectors differ in length");
  if (variances.size() != sample_vectors.rows())
    throw Error(ErrorCode::DimensionMismatch, "need one variance per sample vector");
  if (!(variances.array() > 0.0).all() || !variances.allFinite())
    throw Error(ErrorCode::InvalidArgument, "variances must be positive and finite");
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (max_iters < 1) throw Error(ErrorCode::InvalidArgument, "max_iters must be positive");
}

Design solve_design(const DesignProblem& problem) {
  problem.validate();
  const Subspace sub = row_space(problem.sample_vectors);
  if (sub.rank == 0)
    throw Error(ErrorCode::SpanViolation, "sample vectors are all zero");

  if (!sub.full) {
    for (Index v = 0; v < problem.eval_vectors.rows(); ++v) {
      const Vector e = problem.eval_vectors.row(v).transpose();
      const double residual = (e - sub.basis * (sub.basis.transpose() * e)).norm();
      if (residual > 1e-8 * (1.0 + e.norm()))
        throw Error(ErrorCode::SpanViolation,
                    "eval vector " + std::to_string(v) + " lies outside span(sample vectors)",
                    residual);
    }
  }
  const Matrix sample = to_coords(sub, problem.sample_vectors);

  Design out;
  if (self_evaluating(problem)) {
    out = solve_kiefer_wolfowitz(sample, problem.variances(0), problem.tolerance,
                                 problem.max_iters);
    out.weights = prune(out.weights, sample, sub.rank);
    out.value = value_in_coords(sample, sample, problem.variances, out.weights);
    out.certified = out.certified &&
                    out.value <= out.lower_bound * (1.0 + problem.tolerance) + 1e-12;
  } else {
    const Matrix eval = to_coords(sub, problem.eval_vectors);
    out = solve_smoothed(sample, eval, problem.variances, problem.tolerance,
                         problem.max_iters);
    const Vector pruned = prune(out.weights, sample, sub.rank);
    if (pruned != out.weights) {
      out.weights = pruned;
      out.value = value_in_coords(sample, eval, problem.variances, out.weights);
      out.certified = out.certified &&
                      out.value - out.lower_bound <= problem.tolerance * out.value;
    }
  }
  out.support_size = support_size(out.weights);
  return out;
}

double design_value(const DesignProblem& problem, const Eigen::Ref<const Vector>& lambda) {
  problem.validate();
  if (lambda.size() != problem.sample_vectors.rows())
    throw Error(ErrorCode::DimensionMismatch, "lambda has the wrong length");
  return value_in_coords(problem.sample_vectors, problem.eval_vectors, problem.variances,
                         lambda);
}

}  // namespace hetbandit
