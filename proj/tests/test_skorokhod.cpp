#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "obliq/error.hpp"
#include "obliq/skorokhod.hpp"
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

ReflectionMatrix sym2() {
  Matrix m(2, 2);
  m << 1, -0.5, -0.5, 1;
  return ReflectionMatrix(m);
}

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Solution values at the given times.
Matrix at(const SampledPath& p, const std::vector<double>& ts) { return resample(p, ts).values(); }

}  // namespace

TEST(LinearSegment, ScalarReflection) {
  const ReflectionMatrix r = ReflectionMatrix::identity(1);
  const SkorokhodSolution s = solve_linear_segment(r, vec({1.0}), 0, -1.0, 2.0);
  for (double t : {0.0, 0.25, 0.5, 1.0, 1.5, 2.0}) {
    EXPECT_NEAR(s.z.evaluate(t)(0), std::max(1.0 - t, 0.0), 1e-15) << t;
    EXPECT_NEAR(s.l.evaluate(t)(0), std::max(t - 1.0, 0.0), 1e-15) << t;
  }
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_DOUBLE_EQ(s.events[0].tau, 1.0);
  EXPECT_TRUE(s.events[0].active_before.empty());
  EXPECT_EQ(s.events[0].active_after, (std::vector<std::size_t>{0}));
}

TEST(LinearSegment, TwoByTwoPhases) {
  // Phase 1, J = {1}: [L]_J slope |a| [R]_J^{-1} e_1 = 1; Z_2 slope r_21 * 1 = -0.5, so Z_2 hits 0 at 2.
  // Phase 2, J = {1,2}: L slope [R]^{-1} e_1 = (4/3, 2/3).
  const SkorokhodSolution s = solve_linear_segment(sym2(), vec({0.0, 1.0}), 0, -1.0, 3.0);
  ASSERT_EQ(s.phases.size(), 2u);
  EXPECT_DOUBLE_EQ(s.phases[0].t1, 2.0);
  EXPECT_EQ(s.phases[0].active, (std::vector<std::size_t>{0}));
  EXPECT_NEAR(s.phases[0].l_slope(0), 1.0, 1e-15);
  EXPECT_NEAR(s.phases[0].l_slope(1), 0.0, 1e-15);
  EXPECT_NEAR(s.phases[0].z_slope(1), -0.5, 1e-15);
  EXPECT_EQ(s.phases[1].active, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(s.phases[1].l_slope(0), 4.0 / 3.0, 1e-15);
  EXPECT_NEAR(s.phases[1].l_slope(1), 2.0 / 3.0, 1e-15);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_DOUBLE_EQ(s.events[0].tau, 2.0);
  EXPECT_EQ(s.events[0].active_after, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR(s.l.finish()(0), 2.0 + 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(s.l.finish()(1), 2.0 / 3.0, 1e-14);
  EXPECT_EQ(s.z.finish(), vec({0.0, 0.0}));

  // Same answer from the fixed-point oracle on a grid through the kink.
  const RegularPath x(vec({0.0, 1.0}), {0.0, 3.0}, {0}, {-1.0});
  const std::vector<double> ts = oracle::linspace(3.0, 300);
  const SkorokhodSolution g = solve_grid_oracle(sym2(), x.sample(ts), 1e-13);
  EXPECT_LE(max_abs(at(s.l, ts) - g.l.values()), 1e-11);
  EXPECT_LE(max_abs(at(s.z, ts) - g.z.values()), 1e-11);
}

TEST(LinearSegment, NonnegativeSlopeIsFree) {
  for (double a : {0.0, 0.5, 3.0}) {
    const SkorokhodSolution s = solve_linear_segment(sym2(), vec({0.0, 0.0}), 1, a, 1.0);
    EXPECT_EQ(max_abs(s.l.values()), 0.0);
    EXPECT_NEAR(s.z.finish()(1), a, 1e-15);
    EXPECT_TRUE(s.events.empty());
  }
}

TEST(LinearSegment, FreePhaseThenHit) {
  // x_2 = 0.5 moves down at speed 2 and hits zero at x_i / |a| = 0.25.
  const SkorokhodSolution s = solve_linear_segment(sym2(), vec({1.0, 0.5}), 1, -2.0, 1.0);
  ASSERT_FALSE(s.events.empty());
  EXPECT_DOUBLE_EQ(s.events[0].tau, 0.25);
  EXPECT_NEAR(s.l.evaluate(0.25)(1), 0.0, 1e-15);
}

TEST(LinearSegment, InputChecks) {
  EXPECT_THROW(solve_linear_segment(sym2(), vec({-0.1, 1.0}), 0, -1.0, 1.0), DomainError);
  EXPECT_THROW(solve_linear_segment(sym2(), vec({0.0, 1.0}), 0, -1.0, 1.0, IndexSet(2, {1})), DomainError);
  EXPECT_NO_THROW(solve_linear_segment(sym2(), vec({0.0, 1.0}), 0, -1.0, 1.0, IndexSet(2, {0})));
  EXPECT_THROW(solve_linear_segment(sym2(), vec({0.0, 1.0}), 2, -1.0, 1.0), IndexError);
}

TEST(LinearSegment, SimultaneousHitsJoinOneEvent) {
  Matrix m = Matrix::Identity(3, 3);
  m(1, 0) = -0.5;
  m(2, 0) = -0.5;
  const SkorokhodSolution s = solve_linear_segment(ReflectionMatrix(m), vec({0.0, 1.0, 1.0}), 0, -1.0, 4.0);
  ASSERT_EQ(s.events.size(), 1u);
  EXPECT_DOUBLE_EQ(s.events[0].tau, 2.0);
  EXPECT_EQ(s.events[0].active_after, (std::vector<std::size_t>{0, 1, 2}));
}

TEST(LinearSegment, ZeroPushComponentIsFlagged) {
  // Component 2 starts at zero but nothing couples it to the moving axis.
  const SkorokhodSolution s = solve_linear_segment(ReflectionMatrix::identity(2), vec({0.0, 0.0}), 0, -1.0, 1.0);
  EXPECT_EQ(s.diagnostics.flagged, (std::vector<std::size_t>{1}));
  EXPECT_EQ(s.z.finish(), vec({0.0, 0.0}));
  EXPECT_EQ(s.l.finish(), vec({1.0, 0.0}));
}

TEST(Regular, InteriorNondecreasingPathIsUntouched) {
  const RegularPath x(vec({0.5, 1.0}), {0.0, 0.5, 1.0}, {0, 1}, {1.0, 0.0});
  const SkorokhodSolution s = solve_regular(sym2(), x);
  EXPECT_EQ(max_abs(s.l.values()), 0.0);
  EXPECT_EQ(s.z.finish(), x.evaluate(1.0));
}

TEST(Regular, SingleSegmentMatchesLinearSolver) {
  const RegularPath x(vec({0.0, 1.0}), {0.0, 3.0}, {0}, {-1.0});
  const SkorokhodSolution a = solve_regular(sym2(), x);
  const SkorokhodSolution b = solve_linear_segment(sym2(), vec({0.0, 1.0}), 0, -1.0, 3.0);
  EXPECT_EQ(a.z.times(), b.z.times());
  EXPECT_EQ(a.z.values(), b.z.values());
  EXPECT_EQ(a.l.values(), b.l.values());
}

TEST(Regular, PositiveCouplingIsOutsideTheClass) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 0) = 0.5;
  EXPECT_THROW(ReflectionMatrix{m}, ValidationError);
}

TEST(Regular, MatchesPicardIterationOnAlignedGrids) {
  // Breakpoints on the sample grid make the discrete Skorokhod map exact at grid points.
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const ReflectionMatrix r = random_reflection_matrix(rng, d);
    const RegularPath x = random_regular_path(rng, d, 8, 1.0);
    const std::vector<double> ts = union_times(uniform_grid(1.0, 80), x.breakpoints());
    const SampledPath xs = x.sample(ts);
    const Matrix l = oracle::picard_reflection(r.matrix(), xs.values());
    const Matrix z = xs.values() + r.matrix() * l;
    const SkorokhodSolution s = solve_regular(r, x);
    EXPECT_LE(max_abs(at(s.l, ts) - l), 1e-9) << "trial " << trial;
    EXPECT_LE(max_abs(at(s.z, ts) - z), 1e-9) << "trial " << trial;
  }
}

TEST(Regular, StructuralIdentities) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 5);
    const ReflectionMatrix r = random_reflection_matrix(rng, d);
    const RegularPath x = random_regular_path(rng, d, 20, 2.0);
    const SkorokhodSolution s = solve_regular(r, x);
    for (std::size_t k = 0; k < s.z.size(); ++k) {
      const double t = s.z.times()[k];
      EXPECT_LE(max_abs(s.z.value(k) - x.evaluate(t) - r.matrix() * s.l.value(k)), 1e-12);
      EXPECT_GE(s.z.value(k).minCoeff(), 0.0);
    }
    for (const Phase& p : s.phases) {
      // Midpoints too.
      const double t = 0.5 * (p.t0 + p.t1);
      EXPECT_LE(max_abs(s.z.evaluate(t) - x.evaluate(t) - r.matrix() * s.l.evaluate(t)), 1e-12);
      EXPECT_GE(p.l_slope.minCoeff(), 0.0);
      for (std::size_t c = 0; c < d; ++c) {
        const bool on = std::binary_search(p.active.begin(), p.active.end(), c);
        if (!on) EXPECT_EQ(p.l_slope(static_cast<Eigen::Index>(c)), 0.0);
        if (on) EXPECT_EQ(p.z_slope(static_cast<Eigen::Index>(c)), 0.0);
      }
    }
    const SolutionResidual res = solution_residual(r, x, s);
    EXPECT_LE(res.identity, 1e-12);
    EXPECT_EQ(res.negativity, 0.0);
    EXPECT_LE(res.l_decrease, 0.0);
    EXPECT_LE(res.complementarity, 1e-12);
  }
}

TEST(GridOracle, ScalarMap) {
  const std::vector<double> ts = oracle::linspace(2.0, 2000);
  Matrix v(1, ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) v(0, static_cast<Eigen::Index>(k)) = 1.0 - ts[k];
  const SkorokhodSolution s = solve_grid_oracle(ReflectionMatrix::identity(1), SampledPath(ts, v));
  for (std::size_t k = 0; k < ts.size(); ++k) EXPECT_NEAR(s.l.value(k, 0), std::max(ts[k] - 1.0, 0.0), 1e-12);
}

TEST(GridOracle, NondecreasingDriverNeedsNoPush) {
  const RegularPath x(vec({0.0, 0.2}), {0.0, 1.0, 2.0}, {0, 1}, {1.0, 0.5});
  const SkorokhodSolution s = solve_grid_oracle(sym2(), x.sample(oracle::linspace(2.0, 100)));
  EXPECT_EQ(max_abs(s.l.values()), 0.0);
}

TEST(GridOracle, SweepChangesContractAtTheSpectralRate) {
  // Q = 0.3 (J - I) on four components has spectral radius 0.9.
  const Matrix m = 1.3 * Matrix::Identity(4, 4) - Matrix::Constant(4, 4, 0.3);
  const ReflectionMatrix r(m);
  const std::vector<double> ts = oracle::linspace(1.0, 100);
  Matrix v(4, ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) v.col(static_cast<Eigen::Index>(k)).setConstant(-ts[k]);
  const SkorokhodSolution s = solve_grid_oracle(r, SampledPath(ts, v), 1e-12);
  const auto& h = s.diagnostics.change_history;
  ASSERT_EQ(h.size(), s.diagnostics.iterations);
  ASSERT_GE(h.size(), 20u);
  EXPECT_LT(s.diagnostics.last_change, 1e-12);
  // Early sweeps can grow while the push propagates; the tail contracts no slower than rho.
  const std::size_t m0 = h.size() / 2;
  const double rate = std::pow(h.back() / h[m0], 1.0 / static_cast<double>(h.size() - 1 - m0));
  EXPECT_LT(rate, r.spectral_radius() + 1e-6);
  // Z = X + R L also solves the exact problem: X is linear along the diagonal.
  EXPECT_LE(s.z.values().cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GridOracle, IterationLimitRaises) {
  const RegularPath x(vec({0.0, 1.0}), {0.0, 3.0}, {0}, {-1.0});
  try {
    solve_grid_oracle(sym2(), x.sample(oracle::linspace(3.0, 30)), 1e-14, 2);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.last(), 1e-14);
  }
}

TEST(Continuous, RegularDriverRecoveredWhenLevelRefinesBreakpoints) {
  // d = 1: any level whose anchors include the breakpoints reproduces the path.
  const RegularPath x(vec({1.0}), {0.0, 0.5, 1.0}, {0, 0}, {-3.0, 1.0});
  const SkorokhodSolution exact = solve_regular(ReflectionMatrix::identity(1), x);
  for (std::size_t n : {2u, 4u, 10u}) {
    const SkorokhodSolution c = solve_continuous(ReflectionMatrix::identity(1), x.to_sampled(), n);
    EXPECT_LE(sup_distance(c.z, exact.z), 1e-14) << n;
    EXPECT_LE(sup_distance(c.l, exact.l), 1e-14) << n;
  }
}

TEST(Continuous, ConstantInteriorPath) {
  const SampledPath x = SampledPath::constant(vec({0.3, 0.7}), 1.0);
  for (std::size_t n : {1u, 5u}) {
    const SkorokhodSolution s = solve_continuous(sym2(), x, n);
    EXPECT_EQ(s.z.finish(), vec({0.3, 0.7}));
    EXPECT_EQ(max_abs(s.l.values()), 0.0);
  }
}

TEST(Restart, AtZeroReturnsInputs) {
  const RegularPath x(vec({0.0, 1.0}), {0.0, 3.0}, {0}, {-1.0});
  const SkorokhodSolution s = solve_regular(sym2(), x);
  const Restart<RegularPath> r = restart_inputs(sym2(), x, s, 0.0);
  EXPECT_EQ(r.z, x.start());
  EXPECT_EQ(r.path.knots(), x.knots());
  EXPECT_EQ(r.l, vec({0.0, 0.0}));
  EXPECT_THROW(restart_inputs(sym2(), x, s, 3.5), RangeError);
}

TEST(Restart, SpliceReproducesFullSolution) {
  Rng rng(55);
  std::uniform_real_distribution<double> u(0.05, 0.95);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const ReflectionMatrix r = random_reflection_matrix(rng, d);
    const RegularPath x = random_regular_path(rng, d, 10, 2.0);
    const SkorokhodSolution full = solve_regular(r, x);
    const double t = 2.0 * u(rng);
    const Restart<RegularPath> in = restart_inputs(r, x, full, t);
    const SkorokhodSolution tail = solve_regular(r, in.path);
    for (double s : {0.0, 0.3, 0.7, 1.0}) {
      const double tt = s * (2.0 - t);
      EXPECT_LE(max_abs(tail.z.evaluate(tt) - full.z.evaluate(t + tt)), 1e-10);
      EXPECT_LE(max_abs(tail.l.evaluate(tt) + in.l - full.l.evaluate(t + tt)), 1e-10);
    }
  }
}

TEST(Restart, EventTimeKeepsActiveSet) {
  const RegularPath x(vec({0.0, 1.0}), {0.0, 3.0}, {0}, {-1.0});
  const SkorokhodSolution full = solve_regular(sym2(), x);
  const Restart<RegularPath> in = restart_inputs(sym2(), x, full, 2.0);
  EXPECT_EQ(in.z, vec({0.0, 0.0}));
  const SkorokhodSolution tail = solve_regular(sym2(), in.path);
  ASSERT_FALSE(tail.phases.empty());
  EXPECT_EQ(tail.phases.front().active, full.events.back().active_after);
}

TEST(Restart, SampledSplice) {
  const SampledPath x = [] {
    BrownianSpec b;
    b.dim = 2;
    b.drift = vec({-1.0, -0.5});
    b.covariance = Matrix::Identity(2, 2);
    b.steps = 200;
    b.seed = 9;
    const SampledPath w = sample_brownian(b);
    Matrix v = w.values();
    v.colwise() += vec({0.2, 0.1});
    return SampledPath(w.times(), v);
  }();
  const SkorokhodSolution full = solve_interpolated(sym2(), x);
  const Restart<SampledPath> in = restart_inputs(sym2(), x, full, 0.5);
  const SkorokhodSolution tail = solve_interpolated(sym2(), in.path);
  EXPECT_LE(max_abs(tail.z.finish() - full.z.finish()), 1e-10);
  EXPECT_LE(max_abs(tail.l.finish() + in.l - full.l.finish()), 1e-10);
}

TEST(Srbm, ZeroCovarianceInteriorRun) {
  BrownianSpec b;
  b.dim = 2;
  b.drift = vec({0.5, 1.0});
  b.covariance = Matrix::Zero(2, 2);
  b.horizon = 2.0;
  b.steps = 10;
  const Vector z0 = vec({0.1, 0.2});
  for (SolveMethod m : {SolveMethod::continuous, SolveMethod::interpolated, SolveMethod::grid}) {
    SimulationOptions o;
    o.method = m;
    const SkorokhodSolution sol = simulate_srbm(sym2(), b, z0, o);
    EXPECT_EQ(max_abs(sol.l.values()), 0.0);
    // On the driving grid; the continuous route also records intermediate sweep knots.
    const SampledPath z = resample(sol.z, uniform_grid(b.horizon, b.steps));
    for (std::size_t k = 0; k < z.size(); ++k)
      EXPECT_LE(max_abs(z.value(k) - z0 - b.drift * z.times()[k]), 1e-14);
  }
}

TEST(Srbm, DeterministicPerSeed) {
  BrownianSpec b;
  b.dim = 3;
  b.drift = vec({-0.5, 0.0, -1.0});
  b.covariance = Matrix::Identity(3, 3);
  b.steps = 500;
  b.seed = 77;
  Matrix m(3, 3);
  m << 1, -0.2, -0.3, -0.4, 1, -0.1, -0.2, -0.2, 1;
  const ReflectionMatrix r(m);
  const SkorokhodSolution a = simulate_srbm(r, b, Vector::Zero(3));
  const SkorokhodSolution c = simulate_srbm(r, b, Vector::Zero(3));
  EXPECT_EQ(a.z.values(), c.z.values());
  EXPECT_EQ(a.l.values(), c.l.values());
  EXPECT_EQ(a.z.times(), c.z.times());
}

TEST(Srbm, StrongerDownwardDriftSpendsMoreTimeNearZero) {
  auto fraction = [](double mu) {
    BrownianSpec b;
    b.dim = 1;
    b.drift = vec({mu});
    b.covariance = Matrix::Identity(1, 1);
    b.horizon = 20.0;
    b.steps = 20000;
    b.seed = 3;
    SimulationOptions o;
    o.method = SolveMethod::interpolated;
    const SkorokhodSolution s = simulate_srbm(ReflectionMatrix::identity(1), b, vec({0.0}), o);
    const SampledPath z = resample(s.z, uniform_grid(b.horizon, b.steps));
    return static_cast<double>((z.values().array() < 0.1).count()) / static_cast<double>(z.size());
  };
  const double f1 = fraction(-0.5);
  const double f2 = fraction(-2.0);
  const double f3 = fraction(-5.0);
  EXPECT_LT(f1, f2);
  EXPECT_LT(f2, f3);
}

TEST(Routes, AgreeOnTheSameInput) {
  Rng rng(404);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t d = 1 + static_cast<std::size_t>(trial % 4);
    const ReflectionMatrix r = random_reflection_matrix(rng, d);
    const RegularPath x = random_regular_path(rng, d, 6, 1.0);
    const SkorokhodSolution exact = solve_regular(r, x);
    const SkorokhodSolution interp = solve_interpolated(r, x.to_sampled());
    EXPECT_LE(sup_distance(exact.z, interp.z), 1e-10);
    EXPECT_LE(sup_distance(exact.l, interp.l), 1e-10);
  }
}

TEST(Routes, MethodNames) {
  EXPECT_EQ(parse_solve_method("exact"), SolveMethod::continuous);
  EXPECT_EQ(parse_solve_method("grid"), SolveMethod::grid);
  EXPECT_EQ(parse_solve_method(to_string(SolveMethod::interpolated)), SolveMethod::interpolated);
  EXPECT_THROW(parse_solve_method("fast"), ParameterError);
}
