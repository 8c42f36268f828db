#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "obliq/error.hpp"
#include "obliq/paths.hpp"
#include "obliq/suites.hpp"
#include "oracles.hpp"

using namespace obliq;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out(k++) = x;
  return out;
}

SampledPath brownian(std::size_t dim, std::size_t steps, std::uint64_t seed) {
  BrownianSpec s;
  s.dim = dim;
  s.drift = Vector::Zero(static_cast<Eigen::Index>(dim));
  s.covariance = Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  s.horizon = 1.0;
  s.steps = steps;
  s.seed = seed;
  return sample_brownian(s);
}

// Largest oscillation of any component over [k T/n, (k+1) T/n], from grid samples.
double max_oscillation(const SampledPath& x, std::size_t n) {
  double worst = 0.0;
  const double t = x.horizon();
  for (std::size_t k = 0; k < n; ++k) {
    const double a = t * static_cast<double>(k) / static_cast<double>(n);
    const double b = t * static_cast<double>(k + 1) / static_cast<double>(n);
    for (std::size_t c = 0; c < x.dim(); ++c) {
      double lo = x.evaluate(a)(static_cast<Eigen::Index>(c));
      double hi = lo;
      for (std::size_t m = 0; m < x.size(); ++m) {
        if (x.times()[m] < a || x.times()[m] > b) continue;
        lo = std::min(lo, x.value(m, c));
        hi = std::max(hi, x.value(m, c));
      }
      const double end = x.evaluate(b)(static_cast<Eigen::Index>(c));
      lo = std::min(lo, end);
      hi = std::max(hi, end);
      worst = std::max(worst, hi - lo);
    }
  }
  return worst;
}

}  // namespace

TEST(SampledPathTest, ConstructionAndEvaluation) {
  Matrix v(1, 3);
  v << 0, 2, 1;
  const SampledPath p({0.0, 1.0, 2.0}, v);
  EXPECT_DOUBLE_EQ(p.evaluate(0.5)(0), 1.0);
  EXPECT_DOUBLE_EQ(p.evaluate(1.5)(0), 1.5);
  EXPECT_DOUBLE_EQ(p.evaluate(2.0)(0), 1.0);
  EXPECT_THROW(p.evaluate(2.5), RangeError);
  EXPECT_THROW(p.evaluate(-0.1), RangeError);
  EXPECT_THROW(SampledPath({0.0, 1.0, 1.0}, v), ParameterError);
  EXPECT_THROW(SampledPath({0.5, 1.0, 2.0}, v), ParameterError);
  EXPECT_THROW(SampledPath({0.0, 1.0}, v), DimensionError);
}

TEST(RegularPathTest, EvaluateExamples) {
  const RegularPath p(vec({0, 1}), {0.0, 1.0}, {0}, {-1.0});
  EXPECT_EQ(p.evaluate(0.5), vec({-0.5, 1}));
  EXPECT_EQ(p.evaluate(0.0), p.start());
  EXPECT_THROW(p.evaluate(1.5), RangeError);
}

TEST(RegularPathTest, BreakpointValuesAreContinuous) {
  const RegularPath p(vec({0, 0}), {0.0, 0.3, 0.7, 1.0}, {0, 1, 0}, {2.0, -1.0, 0.5});
  for (std::size_t k = 0; k < p.breakpoints().size(); ++k) {
    const double t = p.breakpoints()[k];
    EXPECT_EQ(p.evaluate(t), p.knot(k));
    if (t > 0.0) EXPECT_LE((p.evaluate(t - 1e-12) - p.knot(k)).cwiseAbs().maxCoeff(), 1e-11);
    if (t < 1.0) EXPECT_LE((p.evaluate(t + 1e-12) - p.knot(k)).cwiseAbs().maxCoeff(), 1e-11);
  }
  EXPECT_EQ(p.to_sampled().finish(), p.knot(3));
}

TEST(RegularPathTest, RejectsBadSegments) {
  EXPECT_THROW(RegularPath(vec({0}), {0.0, 1.0}, {1}, {1.0}), IndexError);
  EXPECT_THROW(RegularPath(vec({0}), {0.0, 0.0}, {0}, {1.0}), ParameterError);
  EXPECT_THROW(RegularPath(vec({0}), {0.0, 1.0}, {0, 0}, {1.0}), DimensionError);
}

TEST(StandardApproximation, OneDimensionalLinearIsReproduced) {
  Matrix v(1, 2);
  v << 0.5, -1.5;
  const SampledPath x({0.0, 2.0}, v);
  const RegularPath a = standard_regular_approximation(x, 1);
  EXPECT_EQ(a.segments(), 1u);
  EXPECT_DOUBLE_EQ(sup_distance(a.to_sampled(), x), 0.0);
}

TEST(StandardApproximation, AnchorsAndSweepOrder) {
  const SampledPath x = brownian(3, 200, 4);
  for (std::size_t n : {1u, 3u, 8u, 50u}) {
    const RegularPath a = standard_regular_approximation(x, n);
    ASSERT_EQ(a.segments(), 3 * n);
    for (std::size_t s = 0; s < a.segments(); ++s) EXPECT_EQ(a.axes()[s], s % 3);
    for (std::size_t k = 0; k <= n; ++k) {
      const double t = static_cast<double>(k) / static_cast<double>(n);
      EXPECT_LE((a.evaluate(t) - x.evaluate(t)).cwiseAbs().maxCoeff(), 1e-15) << "n=" << n << " k=" << k;
    }
  }
  EXPECT_THROW(standard_regular_approximation(x, 0), ParameterError);
}

TEST(StandardApproximation, ErrorBoundedByTwiceOscillation) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const SampledPath x = brownian(2, 512, seed);
    for (std::size_t n : {1u, 2u, 4u, 8u, 16u, 64u}) {
      const RegularPath a = standard_regular_approximation(x, n);
      EXPECT_LE(sup_distance(a.to_sampled(), x), 2.0 * max_oscillation(x, n) + 1e-12);
    }
  }
}

TEST(StandardApproximation, ErrorVanishesUnderRefinement) {
  // Pathwise the error need not decrease at every doubling; it does shrink
  // overall as the subintervals refine.
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SampledPath x = brownian(2, 4096, seed);
    const double coarse = sup_distance(standard_regular_approximation(x, 1).to_sampled(), x);
    const double fine = sup_distance(standard_regular_approximation(x, 1024).to_sampled(), x);
    EXPECT_LE(fine, 0.2 * coarse) << "seed " << seed;
  }
}

TEST(CoupledApproximation, EqualInputsGiveEqualOutputs) {
  const SampledPath x = brownian(2, 100, 9);
  const auto [a, b] = coupled_regular_approximation(x, x, 10);
  EXPECT_TRUE(coupled(a, b));
  EXPECT_EQ(a.knots(), b.knots());
}

TEST(CoupledApproximation, ConstantOffsetIsPreserved) {
  const SampledPath x = brownian(3, 60, 2);
  const Vector c = vec({0.5, 0.0, 2.0});
  Matrix shifted = x.values();
  shifted.colwise() += c;
  const SampledPath xbar(x.times(), shifted);
  const auto [a, b] = coupled_regular_approximation(x, xbar, 6);
  EXPECT_TRUE(coupled(a, b));
  for (Eigen::Index k = 0; k < a.knots().cols(); ++k)
    EXPECT_LE(((b.knots().col(k) - a.knots().col(k)) - c).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CoupledApproximation, RandomDominatedPairsKeepDomination) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const auto [x, xbar] = random_dominated_pair(rng, d, 50);
    const std::size_t n = 1 + static_cast<std::size_t>(trial % 12);
    const auto [a, b] = coupled_regular_approximation(x, xbar, n);
    ASSERT_TRUE(coupled(a, b));
    // Exhaustive over segment endpoints.
    EXPECT_TRUE((a.knot(0).array() <= b.knot(0).array() + 1e-12).all());
    for (std::size_t s = 0; s < a.breakpoints().size(); ++s)
      for (std::size_t t = s; t < a.breakpoints().size(); ++t)
        EXPECT_TRUE(((a.knot(t) - a.knot(s)).array() <= (b.knot(t) - b.knot(s)).array() + 1e-12).all());
  }
}

TEST(CoupledApproximation, ViolationNamesFirstFailingStep) {
  Matrix v(2, 3);
  v << 0, 1, 2, 0, 0, 0;
  Matrix vb = v;
  vb(1, 2) = -0.5;
  try {
    coupled_regular_approximation(SampledPath({0, 1, 2}, v), SampledPath({0, 1, 2}, vb), 2);
    FAIL() << "expected DominationError";
  } catch (const DominationError& e) {
    EXPECT_EQ(e.s(), 1.0);
    EXPECT_EQ(e.t(), 2.0);
    EXPECT_EQ(e.component(), 1u);
  }
}

TEST(Brownian, ZeroCovarianceIsStraightLine) {
  BrownianSpec s;
  s.dim = 2;
  s.drift = vec({1.0, -2.0});
  s.covariance = Matrix::Zero(2, 2);
  s.horizon = 2.0;
  s.steps = 8;
  s.seed = 5;
  const SampledPath b = sample_brownian(s);
  for (std::size_t k = 0; k < b.size(); ++k)
    EXPECT_LE((b.value(k) - s.drift * b.times()[k]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Brownian, DeterministicPerSeed) {
  const SampledPath a = brownian(3, 1000, 42);
  const SampledPath b = brownian(3, 1000, 42);
  const SampledPath c = brownian(3, 1000, 43);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_NE(a.values(), c.values());
}

TEST(Brownian, StreamsAreIndependentOfDimension) {
  const SampledPath two = sample_standard_noise(2, 1.0, 100, 7);
  const SampledPath five = sample_standard_noise(5, 1.0, 100, 7);
  EXPECT_EQ(two.values(), five.values().topRows(2));
  const SampledPath shifted = sample_standard_noise(3, 1.0, 100, 7, 2);
  EXPECT_EQ(shifted.values(), five.values().bottomRows(3));
}

TEST(Brownian, IncrementCovarianceMatchesSpec) {
  BrownianSpec s;
  s.dim = 3;
  s.drift = Vector::Zero(3);
  s.covariance = Matrix(3, 3);
  s.covariance << 2.0, 0.6, -0.4, 0.6, 1.0, 0.2, -0.4, 0.2, 0.5;
  s.horizon = 1.0;
  s.steps = 100000;
  s.seed = 2024;
  const SampledPath b = sample_brownian(s);
  const double dt = 1.0 / static_cast<double>(s.steps);
  const Matrix inc = (b.values().rightCols(s.steps) - b.values().leftCols(s.steps));
  const Matrix cov = inc * inc.transpose() / static_cast<double>(s.steps) / dt;
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      // 5% of the entry's scale, measured against sqrt(A_ii A_jj) for off-diagonals.
      const double scale = std::sqrt(s.covariance(i, i) * s.covariance(j, j));
      EXPECT_NEAR(cov(i, j), s.covariance(i, j), 0.05 * scale) << i << "," << j;
    }
}

TEST(CovarianceFactor, SquareRootAndClipping) {
  Matrix a(2, 2);
  a << 2.0, -1.0, -1.0, 2.0;
  const Matrix f = covariance_factor(a);
  EXPECT_LE((f * f.transpose() - a).cwiseAbs().maxCoeff(), 1e-14);
  Matrix singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0 - 1e-13;
  EXPECT_NO_THROW(covariance_factor(singular));
  Matrix indefinite(2, 2);
  indefinite << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(covariance_factor(indefinite), MatrixError);
}

TEST(CbpDrivingPath, Examples) {
  const SampledPath zero = SampledPath::constant(Vector::Zero(2), 1.0);
  const SampledPath c = cbp_driving_path(vec({0.0, 1.0}), vec({0, 0}), vec({1, 1}), zero);
  EXPECT_EQ(c.finish(), vec({0.0, 1.0}));
  Matrix grid = Matrix::Zero(2, 3);
  const SampledPath b({0.0, 0.5, 1.0}, grid);
  const SampledPath x = cbp_driving_path(vec({0, 0}), vec({1, 0}), vec({1, 1}), b);
  EXPECT_EQ(x.value(1), vec({0.5, 0.0}));
  EXPECT_THROW(cbp_driving_path(vec({0, 0}), vec({0, 0}), vec({1, 0}), b), ParameterError);
  EXPECT_THROW(cbp_driving_path(vec({1, 0}), vec({0, 0}), vec({1, 1}), b), OrderingError);
}

TEST(DifferencePath, ComponentsArePairwiseDifferences) {
  Matrix v(2, 2);
  v << 0, 0, 0, 1;
  const SampledPath d = difference_path(SampledPath({0.0, 1.0}, v));
  EXPECT_EQ(d.dim(), 1u);
  EXPECT_EQ(d.finish()(0), 1.0);

  const SampledPath x = brownian(3, 20, 8);
  const SampledPath g = difference_path(x);
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t c = 0; c < 2; ++c) EXPECT_EQ(g.value(k, c), x.value(k, c + 1) - x.value(k, c));
  EXPECT_THROW(difference_path(brownian(1, 5, 1)), DimensionError);
}

TEST(IncrementDomination, Examples) {
  const SampledPath x = brownian(2, 10, 3);
  EXPECT_TRUE(increments_dominated(x, x).dominated);

  Matrix reduced = x.values();
  reduced.rightCols(5).row(1).array() -= 0.1;
  const DominationCheck c = increments_dominated(x, SampledPath(x.times(), reduced));
  ASSERT_FALSE(c.dominated);
  ASSERT_TRUE(c.violation.has_value());
  EXPECT_EQ(c.violation->component, 1u);
  EXPECT_EQ(c.violation->s, x.times()[5]);
  EXPECT_EQ(c.violation->t, x.times()[6]);
  EXPECT_NEAR(c.violation->margin, 0.1, 1e-12);

  // X_1 = -t, Xbar_1 = 1 - t, second components identically one.
  const std::vector<double> ts = oracle::linspace(1.0, 10);
  Matrix xv(2, 11), xb(2, 11);
  for (int k = 0; k <= 10; ++k) {
    xv.col(k) << -ts[static_cast<std::size_t>(k)], 1.0;
    xb.col(k) << 1.0 - ts[static_cast<std::size_t>(k)], 1.0;
  }
  EXPECT_TRUE(increments_dominated(SampledPath(ts, xv), SampledPath(ts, xb)).dominated);
  EXPECT_THROW(increments_dominated(x, brownian(2, 11, 3)), AlignmentError);
}

TEST(IncrementDomination, AdjacentStepsMatchAllPairs) {
  Rng rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const int m = 2 + trial % 6;
    const std::vector<double> ts = oracle::linspace(1.0, m);
    Matrix a(2, m + 1), b(2, m + 1);
    for (int k = 0; k <= m; ++k)
      for (int c = 0; c < 2; ++c) {
        a(c, k) = u(rng);
        b(c, k) = a(c, k) + 0.3 * u(rng) + 0.2;
      }
    bool brute = (a.col(0).array() <= b.col(0).array() + 1e-12).all();
    for (int s = 0; s <= m; ++s)
      for (int t = s; t <= m; ++t)
        brute = brute && ((a.col(t) - a.col(s)).array() <= (b.col(t) - b.col(s)).array() + 1e-12).all();
    EXPECT_EQ(increments_dominated(SampledPath(ts, a), SampledPath(ts, b)).dominated, brute);
  }
}

TEST(GridUtilities, UnionResampleAndDistance) {
  EXPECT_EQ(union_times({0.0, 0.5, 1.0}, {0.0, 0.25, 1.0}), (std::vector<double>{0.0, 0.25, 0.5, 1.0}));
  Matrix va(1, 2), vb(1, 3);
  va << 0, 1;
  vb << 0, 1, 1;
  const SampledPath a({0.0, 1.0}, va);
  const SampledPath b({0.0, 0.5, 1.0}, vb);
  EXPECT_DOUBLE_EQ(resample(a, {0.0, 0.25, 1.0}).value(1, 0), 0.25);
  EXPECT_DOUBLE_EQ(sup_distance(a, b), 0.5);
  EXPECT_DOUBLE_EQ(sup_distance(b, a), 0.5);
  EXPECT_EQ(uniform_grid(2.0, 4), (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_EQ(derive_seed(1, 0), derive_seed(1, 0));
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}
