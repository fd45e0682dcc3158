#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "hetbandit/design.hpp"
#include "hetbandit/rng.hpp"
#include "test_support.hpp"

namespace hetbandit {
namespace {

using testing::explicit_design_value;
using testing::gaussian_matrix;
using testing::grid_search_value;

void expect_probability_vector(const Vector& w) {
  EXPECT_GE(w.minCoeff(), 0.0);
  EXPECT_NEAR(w.sum(), 1.0, 1e-9);
}

TEST(GOptimal, KieferWolfowitzValueEqualsDimension) {
  CounterRng rng(101, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(5));
    const Index n = d + static_cast<Index>(rng.below(static_cast<std::uint64_t>(30 - d)));
    const Matrix x = gaussian_matrix(rng, n, d);
    const Design design = solve_design(DesignProblem::g_optimal(x));
    EXPECT_TRUE(design.certified);
    expect_probability_vector(design.weights);
    EXPECT_NEAR(design.value, static_cast<double>(d), 1e-3 * d * 1.01);
    EXPECT_LE(design.support_size, lifted_dimension(d) + 1);
    const double oracle = explicit_design_value(x, x, Vector::Ones(n), design.weights);
    EXPECT_NEAR(oracle, design.value, 1e-8 * design.value);
  }
}

TEST(GOptimal, SolvesInsideSpanOfSampleVectors) {
  Matrix x(4, 3);
  x << 1, 0, 0, 0, 1, 0, 1, 1, 0, 2, -1, 0;
  const Design design = solve_design(DesignProblem::g_optimal(x));
  EXPECT_TRUE(design.certified);
  EXPECT_NEAR(design.value, 2.0, 2e-3 * 1.01);
}

TEST(GOptimal, OrthonormalBasisIsUniform) {
  const Design design = solve_design(DesignProblem::g_optimal(Matrix::Identity(4, 4), 1e-6));
  for (Index i = 0; i < 4; ++i) EXPECT_NEAR(design.weights(i), 0.25, 1e-6);
  EXPECT_NEAR(design.value, 4.0, 1e-5);
}

TEST(WeightedDesign, TwoArmClosedForm) {
  // min sigma1^2 / l + sigma2^2 / (1 - l) = (sigma1 + sigma2)^2 at l = sigma1 / (sigma1 + sigma2).
  DesignProblem p;
  p.sample_vectors = Matrix::Identity(2, 2);
  p.eval_vectors = Matrix(1, 2);
  p.eval_vectors << 1.0, -1.0;
  p.variances = Vector(2);
  p.variances << 1.0, 4.0;
  p.tolerance = 1e-6;
  const Design design = solve_design(p);
  EXPECT_TRUE(design.certified);
  EXPECT_NEAR(design.value, 9.0, 9.0 * 2e-6);
  EXPECT_NEAR(design.weights(0), 1.0 / 3.0, 1e-3);
  EXPECT_LE(design.lower_bound, design.value);
  EXPECT_GE(design.lower_bound, 9.0 * (1.0 - 1e-5));
}

TEST(WeightedDesign, MatchesExplicitInverseAndGridSearch) {
  CounterRng rng(202, 0);
  for (int trial = 0; trial < 6; ++trial) {
    const Index d = 2;
    const Index n = 3;
    const Matrix x = gaussian_matrix(rng, n, d);
    const Matrix eval = gaussian_matrix(rng, 3, d);
    Vector var(n);
    for (Index i = 0; i < n; ++i) var(i) = 0.2 + 3.0 * rng.uniform();
    DesignProblem p;
    p.sample_vectors = x;
    p.eval_vectors = eval;
    p.variances = var;
    p.tolerance = 1e-5;
    const Design design = solve_design(p);
    expect_probability_vector(design.weights);
    EXPECT_NEAR(explicit_design_value(x, eval, var, design.weights), design.value,
                1e-8 * design.value);
    EXPECT_NEAR(design_value(p, design.weights), design.value, 1e-9 * design.value);
    const double grid = grid_search_value(x, eval, var, 0.005);
    EXPECT_LE(design.value, grid * (1.0 + 1e-6));
    EXPECT_GE(design.value, grid * 0.97);
    EXPECT_LE(design.lower_bound, design.value * (1.0 + 1e-12));
  }
}

TEST(WeightedDesign, LowerBoundCertifiesOptimum) {
  CounterRng rng(303, 0);
  const Matrix x = gaussian_matrix(rng, 12, 4);
  const Matrix eval = gaussian_matrix(rng, 20, 4);
  Vector var(12);
  for (Index i = 0; i < 12; ++i) var(i) = 0.5 + rng.uniform();
  DesignProblem p{x, eval, var, 1e-3, 20000};
  const Design design = solve_design(p);
  ASSERT_TRUE(design.certified);
  EXPECT_LE(design.value - design.lower_bound, 1e-3 * design.value + 1e-12);
  // No vertex of the simplex beats the certified lower bound.
  for (Index i = 0; i < 12; ++i) {
    Vector mix = 0.5 * design.weights;
    mix(i) += 0.5;
    EXPECT_GE(design_value(p, mix), design.lower_bound * (1.0 - 1e-9));
  }
}

TEST(WeightedDesign, DroppedArmDoesNotStallAwaySteps) {
  // An away step leaves x3 with a roundoff-sized weight on this instance.
  const double c = std::cos(0.5), s = std::sin(0.5) + 1e-10;
  Matrix x(3, 2);
  x << 1, 0, 0, 1, c, s;
  Matrix eval(2, 2);
  eval.row(0) = x.row(0) - x.row(1);
  eval.row(1) = (x.row(0) - x.row(2)) / (1.0 - c);
  const Design design = solve_design(DesignProblem{x, eval, Vector::Ones(3), 1e-3, 20000});
  ASSERT_TRUE(design.certified);
  EXPECT_LT(design.iterations, 100);
  EXPECT_NEAR(design.value, explicit_design_value(x, eval, Vector::Ones(3), design.weights), 1e-9);
  EXPECT_LE(design.value, grid_search_value(x, eval, Vector::Ones(3), 0.001) * (1.0 + 1e-3));
}

TEST(WeightedDesign, RandomProblemsCertifyOrStayNearOptimum) {
  CounterRng rng(606, 0);
  int certified = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index d = 2 + static_cast<Index>(rng.below(4));
    const Index n = d + static_cast<Index>(rng.below(10));
    const Matrix x = gaussian_matrix(rng, n, d);
    Vector var(n);
    for (Index i = 0; i < n; ++i) var(i) = trial % 2 == 0 ? 1.0 : 0.05 + rng.uniform();
    const Matrix eval = gaussian_matrix(rng, 1 + static_cast<Index>(rng.below(8)), d);
    const Design design = solve_design(DesignProblem{x, eval, var, 1e-3, 20000});
    if (design.certified) {
      ++certified;
      continue;
    }
    // Slow instances run out of iterations but stay near the optimum.
    EXPECT_EQ(design.iterations, 20000);
    const Design longer = solve_design(DesignProblem{x, eval, var, 1e-3, 200000});
    ASSERT_TRUE(longer.certified) << "trial " << trial;
    EXPECT_LE(design.value, longer.lower_bound * (1.0 + 2e-3)) << "trial " << trial;
  }
  EXPECT_GE(certified, 190);
}

TEST(WeightedDesign, DeterministicAcrossCalls) {
  CounterRng rng(404, 0);
  const Matrix x = gaussian_matrix(rng, 10, 3);
  DesignProblem p{x, gaussian_matrix(rng, 6, 3), Vector::Constant(10, 2.0), 1e-3, 20000};
  const Design a = solve_design(p);
  const Design b = solve_design(p);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.value, b.value);
}

TEST(WeightedDesign, IterationCapReturnsUncertifiedIterate) {
  CounterRng rng(505, 0);
  const Matrix x = gaussian_matrix(rng, 15, 5);
  DesignProblem p{x, gaussian_matrix(rng, 15, 5), Vector::Ones(15), 1e-12, 2};
  const Design design = solve_design(p);
  EXPECT_FALSE(design.certified);
  expect_probability_vector(design.weights);
  EXPECT_TRUE(std::isfinite(design.value));
}

TEST(DesignProblem, ValidationErrors) {
  DesignProblem p;
  p.sample_vectors = Matrix::Identity(2, 2);
  p.eval_vectors = Matrix::Identity(3, 3);
  p.variances = Vector::Ones(2);
  EXPECT_THROW(p.validate(), Error);
  p.eval_vectors = Matrix::Identity(2, 2);
  p.variances = Vector::Ones(3);
  EXPECT_THROW(p.validate(), Error);
  p.variances = Vector::Zero(2);
  EXPECT_THROW(p.validate(), Error);
  p.variances = Vector::Ones(2);
  p.tolerance = 0.0;
  EXPECT_THROW(p.validate(), Error);
}

TEST(DesignProblem, EvalOutsideSpanIsRejected) {
  DesignProblem p;
  p.sample_vectors = Matrix(2, 3);
  p.sample_vectors << 1, 0, 0, 0, 1, 0;
  p.eval_vectors = Matrix(1, 3);
  p.eval_vectors << 0, 0, 1;
  p.variances = Vector::Ones(2);
  try {
    solve_design(p);
    FAIL() << "expected SpanViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SpanViolation);
  }
}

Design make_design(std::initializer_list<double> w) {
  Design d;
  d.weights = Vector(static_cast<Index>(w.size()));
  Index i = 0;
  for (double v : w) d.weights(i++) = v;
  return d;
}

TEST(Rounding, CeilingCoversBudgetOnSupport) {
  const Design d = make_design({0.5, 0.0, 0.3, 0.2});
  const RoundSchedule s = round_design(d, 101.0);
  EXPECT_EQ(s.mode, RoundingMode::Ceiling);
  EXPECT_EQ(s.counts, (std::vector<std::int64_t>{51, 0, 31, 21}));
  EXPECT_EQ(s.total, 103);
}

TEST(Rounding, CeilingDoesNotOvershootExactProducts) {
  const Design d = make_design({0.1, 0.7, 0.2});
  const RoundSchedule s = round_design(d, 10.0);
  EXPECT_EQ(s.counts, (std::vector<std::int64_t>{1, 7, 2}));
  EXPECT_EQ(s.total, 10);
}

TEST(Rounding, CeilingGivesAtLeastOnePullPerSupportPoint) {
  const Design d = make_design({1e-6, 1.0 - 1e-6});
  const RoundSchedule s = round_design(d, 3.0);
  EXPECT_EQ(s.counts[0], 1);
  EXPECT_EQ(s.counts[1], 3);
}

TEST(Rounding, EfficientSumsToBudgetAndStaysEfficient) {
  CounterRng rng(606, 0);
  int certified = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(8));
    Design d;
    d.weights = Vector(n);
    for (Index i = 0; i < n; ++i) d.weights(i) = rng.uniform() < 0.2 ? 0.0 : 0.05 + rng.uniform();
    if (d.weights.sum() == 0.0) d.weights(0) = 1.0;
    d.weights /= d.weights.sum();
    const double p = static_cast<double>((d.weights.array() > 0.0).count());
    const auto budget = static_cast<std::int64_t>(p) + static_cast<std::int64_t>(rng.below(500));
    const RoundSchedule s = round_design(d, static_cast<double>(budget), RoundingMode::Efficient);
    EXPECT_EQ(s.total, budget);
    EXPECT_EQ(std::accumulate(s.counts.begin(), s.counts.end(), std::int64_t{0}), budget);
    for (Index i = 0; i < n; ++i) {
      if (d.weights(i) == 0.0) {
        EXPECT_EQ(s.counts[static_cast<std::size_t>(i)], 0);
        continue;
      }
      const double share = static_cast<double>(s.counts[static_cast<std::size_t>(i)]);
      EXPECT_GE(share, (static_cast<double>(budget) - p) * d.weights(i) - 1e-9);
    }
  }
}

TEST(Rounding, ScheduleValueScalesWithBudget) {
  const Matrix x = Matrix::Identity(3, 3);
  const Design design = solve_design(DesignProblem::g_optimal(x, 1e-6));
  const RoundSchedule s = round_design(design, 300.0, RoundingMode::Efficient);
  EXPECT_EQ(s.counts, (std::vector<std::int64_t>{100, 100, 100}));
  EXPECT_NEAR(schedule_value(DesignProblem::g_optimal(x), s), 3.0 / 300.0, 1e-12);
}

TEST(Rounding, RejectsBadInput) {
  EXPECT_THROW(round_design(make_design({0.5, 0.5}), 0.0), Error);
  EXPECT_THROW(round_design(make_design({1.5, -0.5}), 10.0), Error);
  EXPECT_THROW(round_design(make_design({0.5, 0.5}), 0.5, RoundingMode::Efficient), Error);
}

}  // namespace
}  // namespace hetbandit
