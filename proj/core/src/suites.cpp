#include "obliq/suites.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <tuple>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }
std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}
bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

IndexSet random_subset(Rng& rng, std::size_t d) {
  std::vector<std::size_t> m;
  for (std::size_t k = 0; k < d; ++k)
    if (coin(rng, 0.5)) m.push_back(k);
  if (m.empty()) m.push_back(pick(rng, 0, d - 1));
  return IndexSet(d, m);
}

Matrix random_nonneg(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix a(idx(rows), idx(cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = coin(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 2.0);
  return a;
}

}  // namespace

ReflectionMatrix random_reflection_matrix(Rng& rng, std::size_t d, double max_radius) {
  Matrix q = Matrix::Zero(idx(d), idx(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (i != j && coin(rng, 0.7)) q(idx(i), idx(j)) = uniform(rng, 0.0, 1.0);
  const double rho = spectral_radius_nonneg(q);
  if (rho > 0.0) q *= uniform(rng, 0.0, max_radius) / rho;
  return ReflectionMatrix(Matrix::Identity(idx(d), idx(d)) - q);
}

ReflectionMatrix random_upper_matrix(Rng& rng, const ReflectionMatrix& r) {
  Matrix q = r.q();
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    for (Eigen::Index j = 0; j < q.cols(); ++j) q(i, j) *= uniform(rng, 0.0, 1.0);
  return ReflectionMatrix(Matrix::Identity(q.rows(), q.cols()) - q);
}

CollisionParams random_collision_params(Rng& rng, std::size_t n) {
  Vector qp(idx(n)), qm(idx(n));
  for (std::size_t k = 0; k < n; ++k) qm(idx(k)) = uniform(rng, 0.05, 0.95);
  qp(0) = uniform(rng, 0.05, 0.95);
  for (std::size_t k = 1; k < n; ++k) qp(idx(k)) = 1.0 - qm(idx(k - 1));
  return CollisionParams(qp, qm);
}

CollisionParams random_dominating_params(Rng& rng, const CollisionParams& q) {
  const std::size_t n = q.size();
  Vector qp = q.qplus();
  Vector qm = q.qminus();
  for (std::size_t k = 1; k < n; ++k) {
    if (qp(idx(k)) < 0.99 && coin(rng, 0.8)) qp(idx(k)) = uniform(rng, qp(idx(k)), 0.99);
    qm(idx(k - 1)) = 1.0 - qp(idx(k));
  }
  return CollisionParams(qp, qm);
}

Vector random_ordered_point(Rng& rng, std::size_t n, double max_gap, double tie_fraction) {
  Vector y(idx(n));
  y(0) = uniform(rng, -1.0, 1.0);
  for (std::size_t k = 1; k < n; ++k)
    y(idx(k)) = y(idx(k - 1)) + (coin(rng, tie_fraction) ? 0.0 : uniform(rng, 0.0, max_gap));
  return y;
}

Vector random_upper_ordered_point(Rng& rng, const Vector& y0) {
  Vector y = y0;
  for (Eigen::Index k = 0; k < y.size(); ++k) {
    const double c = coin(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 0.5);
    y(k) = y0(k) + c;
    if (k > 0) y(k) = std::max(y(k), y(k - 1));
  }
  return y;
}

Vector random_orthant_point(Rng& rng, std::size_t d, double zero_fraction) {
  Vector x(idx(d));
  for (std::size_t k = 0; k < d; ++k) x(idx(k)) = coin(rng, zero_fraction) ? 0.0 : uniform(rng, 0.0, 1.0);
  return x;
}

RegularPath random_regular_path(Rng& rng, std::size_t d, std::size_t segments, double horizon) {
  std::vector<double> breaks = uniform_grid(horizon, segments);
  std::vector<std::size_t> axes(segments);
  std::vector<double> slopes(segments);
  for (std::size_t k = 0; k < segments; ++k) {
    axes[k] = pick(rng, 0, d - 1);
    slopes[k] = coin(rng, 0.1) ? 0.0 : uniform(rng, -3.0, 2.0);
  }
  return RegularPath(random_orthant_point(rng, d), std::move(breaks), std::move(axes), std::move(slopes));
}

std::pair<SampledPath, SampledPath> random_dominated_pair(Rng& rng, std::size_t d, std::size_t steps,
                                                          double horizon) {
  std::vector<double> t = uniform_grid(horizon, steps);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector drift(idx(d));
  for (std::size_t c = 0; c < d; ++c) drift(idx(c)) = uniform(rng, -2.0, 1.0);
  Matrix xbar(idx(d), idx(steps + 1));
  Matrix x(idx(d), idx(steps + 1));
  xbar.col(0) = random_orthant_point(rng, d);
  for (std::size_t c = 0; c < d; ++c) {
    const double start = xbar(idx(c), 0);
    x(idx(c), 0) = coin(rng, 0.5) ? start : uniform(rng, 0.0, start);
  }
  for (std::size_t k = 1; k <= steps; ++k) {
    const double dt = t[k] - t[k - 1];
    for (std::size_t c = 0; c < d; ++c) {
      const double inc = drift(idx(c)) * dt + std::sqrt(dt) * normal(rng);
      const double lag = coin(rng, 0.5) ? 0.0 : uniform(rng, 0.0, 2.0) * dt;
      xbar(idx(c), idx(k)) = xbar(idx(c), idx(k - 1)) + inc;
      x(idx(c), idx(k)) = x(idx(c), idx(k - 1)) + inc - lag;
    }
  }
  return {SampledPath(t, std::move(x)), SampledPath(t, std::move(xbar))};
}

CbpSpec random_cbp_spec(Rng& rng, std::size_t n, std::size_t steps, double horizon) {
  CbpSpec s;
  s.g.resize(idx(n));
  s.sigma2.resize(idx(n));
  for (std::size_t k = 0; k < n; ++k) {
    s.g(idx(k)) = uniform(rng, -1.0, 1.0);
    s.sigma2(idx(k)) = uniform(rng, 0.2, 2.0);
  }
  s.q = random_collision_params(rng, n);
  s.y0 = random_ordered_point(rng, n);
  s.horizon = horizon;
  s.steps = steps;
  s.seed = rng();
  return s;
}

namespace {

using Instance = std::function<ComparisonReport(Rng&, const SuiteOptions&, double tol)>;

constexpr std::size_t corollary_steps = 1000;

ComparisonReport thm31(Rng& rng, const SuiteOptions& o, double tol) {
  const std::size_t d = pick(rng, 1, 5);
  ReflectionMatrix r = random_reflection_matrix(rng, d);
  ReflectionMatrix rbar = random_upper_matrix(rng, r);
  if (o.break_hypothesis) {
    // Strictly below R in one off-diagonal entry, so R <= Rbar fails.
    Matrix m = r.matrix();
    if (d == 1) m = Matrix::Identity(2, 2);
    const auto dd = m.rows();
    Matrix lower = m;
    lower(0, dd - 1) -= 0.05;
    const ReflectionMatrix rb(lower);
    const auto [x, xbar] = random_dominated_pair(rng, static_cast<std::size_t>(dd), 20);
    const auto [xr, xbr] = coupled_regular_approximation(x, xbar, 5);
    return check_skorokhod_comparison(ReflectionMatrix(m), rb, xr, xbr, tol);
  }
  const auto [x, xbar] = random_dominated_pair(rng, d, pick(rng, 10, 60));
  const auto [xr, xbr] = coupled_regular_approximation(x, xbar, pick(rng, 1, 12));
  return check_skorokhod_comparison(r, rbar, xr, xbr, tol);
}

ComparisonReport thm32(Rng& rng, const SuiteOptions& o, double tol) {
  const std::size_t n = pick(rng, 2, 6);
  const CollisionParams q = random_collision_params(rng, n);
  const CollisionParams qbar = o.break_hypothesis ? q : random_dominating_params(rng, q);
  const Vector y0 = random_ordered_point(rng, n);
  const Vector y0bar = random_upper_ordered_point(rng, y0);
  const std::size_t i = pick(rng, 0, n - 1);
  const double slope = uniform(rng, -3.0, 3.0);
  const double slope_bar = o.break_hypothesis ? slope - 1.0 : slope + (coin(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 2.0));
  return check_particle_comparison_linear(q, qbar, y0, y0bar, i, slope, slope_bar, uniform(rng, 0.5, 3.0), tol);
}

ComparisonReport right_removal(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 3, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  return check_removal_corollaries(s, 0, pick(rng, 1, n - 2), tol);
}

ComparisonReport left_removal(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 3, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  return check_removal_corollaries(s, pick(rng, 1, n - 2), n - 1, tol);
}

ComparisonReport two_sided_removal(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 4, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  const std::size_t lo = pick(rng, 1, n - 3);
  return check_removal_corollaries(s, lo, pick(rng, lo + 1, n - 2), tol);
}

ComparisonReport initial_shift(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 2, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  const std::size_t part = pick(rng, 0, 2);
  std::optional<Vector> y0bar;
  std::optional<Vector> z0bar;
  if (part != 1) y0bar = random_upper_ordered_point(rng, s.y0);
  if (part != 0) {
    Vector z = s.y0.tail(idx(n - 1)) - s.y0.head(idx(n - 1));
    for (Eigen::Index k = 0; k < z.size(); ++k)
      if (!coin(rng, 0.3)) z(k) += uniform(rng, 0.0, 0.5);
    z0bar = z;
  }
  return check_initial_shift(s, y0bar, z0bar, tol);
}

ComparisonReport q_increase(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 2, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  return check_parameter_monotonicity(s, random_dominating_params(rng, s.q), s.g, tol);
}

ComparisonReport drift(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 2, 6);
  const CbpSpec s = random_cbp_spec(rng, n, corollary_steps);
  Vector gbar = s.g;
  if (coin(rng, 0.5)) {
    for (Eigen::Index k = 0; k < gbar.size(); ++k)
      if (!coin(rng, 0.3)) gbar(k) += uniform(rng, 0.0, 1.0);
  } else {
    // Nondecreasing shift: gap drifts dominate, positions need not.
    double h = uniform(rng, -1.0, 1.0);
    for (Eigen::Index k = 0; k < gbar.size(); ++k) {
      gbar(k) += h;
      h += coin(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 1.0);
    }
  }
  return check_parameter_monotonicity(s, s.q, gbar, tol);
}

ComparisonReport counterexample(Rng& rng, const SuiteOptions&, double tol) {
  const double r21 = coin(rng, 0.5) ? 0.5 : uniform(rng, 0.01, 2.0);
  const Counterexample c = counterexample_positive_offdiag(r21);
  ViolationTracker tr;
  tr.record(std::abs(c.margin_at_end - r21), 1.0, 1, "margin(1)=r21");
  tr.record(c.identity_residual, 0.0, 0, "Z=X+RL");
  for (std::size_t k = 0; k < c.times.size(); ++k) {
    const double t = c.times[k];
    tr.record(std::abs(c.z(1, idx(k)) - (1.0 + r21 * t)), t, 1, "Z2=1+r21*t");
    tr.record(std::abs(c.zbar(1, idx(k)) - 1.0), t, 1, "Zbar2=1");
  }
  if (!c.violation_certified) tr.record(1.0, 0.0, 1, "Z2>Zbar2");
  return tr.report(tol);
}

ComparisonReport matrix_lemmas(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t d = pick(rng, 1, 6);
  const ReflectionMatrix r = random_reflection_matrix(rng, d);
  const ReflectionMatrix rbar = random_upper_matrix(rng, r);
  const IndexSet j = random_subset(rng, d);
  ViolationTracker tr;

  const MatrixLemmaReport rep = check_matrix_lemmas(r, rbar, j, tol);
  // Direct-inverse oracle, independent of the Neumann series.
  const Matrix rinv = r.matrix().inverse();
  const Matrix rbinv = rbar.matrix().inverse();
  const Matrix rj = principal_submatrix(r.matrix(), j);
  const Matrix rjinv = rj.inverse();
  const Matrix upper = principal_submatrix(rinv, j);
  tr.record(validate_reflection_m_matrix(rj).accepted && rep.submatrix_valid ? 0.0 : 1.0, 0, 0, "P5");
  tr.record(std::max((-rjinv).maxCoeff(), rep.submatrix_inverse_negativity), 0, 0, "P1 lower");
  tr.record(std::max((rjinv - upper).maxCoeff(), rep.submatrix_inverse_excess), 0, 0, "P1 upper");
  tr.record(std::max({(rbinv - rinv).maxCoeff(), (-rbinv).maxCoeff(), rep.inverse_order_violation}), 0, 0, "P3");
  tr.record(rep.holds ? 0.0 : 1.0, 0, 0, "lemma report");

  const std::size_t m = pick(rng, 1, 6);
  const std::size_t k = pick(rng, 1, 6);
  const Matrix a = random_nonneg(rng, m, d);
  const Matrix b = random_nonneg(rng, d, k);
  tr.record(submatrix_product_violation(a, b, random_subset(rng, m), j, random_subset(rng, k)), 0, 0, "P2");

  const Matrix bsmall = random_nonneg(rng, m, d);
  const Matrix abig = bsmall + random_nonneg(rng, m, d);
  const Matrix dsmall = random_nonneg(rng, d, k);
  const Matrix cbig = dsmall + random_nonneg(rng, d, k);
  tr.record(product_order_violation(abig, bsmall, cbig, dsmall), 0, 0, "P6");

  Vector v(idx(d));
  for (std::size_t c = 0; c < d; ++c) v(idx(c)) = coin(rng, 0.3) ? 0.0 : uniform(rng, 0.0, 2.0);
  tr.record(restricted_action_violation(random_nonneg(rng, d, d), v, j), 0, 0, "P7");
  return tr.report(tol);
}

ComparisonReport identities(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t d = pick(rng, 1, 5);
  const ReflectionMatrix r = random_reflection_matrix(rng, d);
  const RegularPath x = random_regular_path(rng, d, pick(rng, 1, 40), uniform(rng, 0.5, 3.0));
  const SkorokhodSolution sol = solve_regular(r, x);
  ViolationTracker tr;
  tr.record(0.0, 0.0, 0, "none");
  const Matrix& z = sol.z.values();
  const Matrix& l = sol.l.values();
  for (std::size_t k = 0; k < sol.z.size(); ++k) {
    const double t = sol.z.times()[k];
    const Vector res = z.col(idx(k)) - x.evaluate(t) - r.matrix() * l.col(idx(k));
    Eigen::Index c = 0;
    const double worst = res.cwiseAbs().maxCoeff(&c);
    tr.record(worst, t, static_cast<std::size_t>(c), "Z=X+RL");
    tr.record(-z.col(idx(k)).minCoeff(), t, 0, "Z>=0");
  }
  std::map<std::size_t, std::vector<const Phase*>> by_segment;
  for (const Phase& p : sol.phases) by_segment[p.segment].push_back(&p);
  for (const auto& [seg, phases] : by_segment) {
    const double excess = static_cast<double>(phases.size()) - static_cast<double>(d + 1);
    tr.record(excess > 0 ? excess : 0.0, phases.front()->t0, 0, "phases<=d+1");
    for (std::size_t k = 1; k < phases.size(); ++k) {
      const auto& a = phases[k - 1]->active;
      const auto& b = phases[k]->active;
      const bool grows = b.size() > a.size() && std::includes(b.begin(), b.end(), a.begin(), a.end());
      tr.record(grows ? 0.0 : 1.0, phases[k]->t0, 0, "active set grows");
    }
    const double slope = x.slopes()[seg];
    for (const Phase* p : phases) {
      tr.record(-p->l_slope.minCoeff(), p->t0, 0, "L nondecreasing");
      if (slope < 0.0) tr.record(p->z_slope.maxCoeff(), p->t0, 0, "Z nonincreasing");
      for (std::size_t c = 0; c < d; ++c)
        if (p->l_slope(idx(c)) > 0.0 && !std::binary_search(p->active.begin(), p->active.end(), c))
          tr.record(p->l_slope(idx(c)), p->t0, c, "L grows off the boundary");
    }
  }
  return tr.report(tol);
}

// sup over the oracle grid of |exact - oracle| for Z and L.
double grid_distance(const SkorokhodSolution& exact, const SkorokhodSolution& grid) {
  const SampledPath ze = resample(exact.z, grid.z.times());
  const SampledPath le = resample(exact.l, grid.l.times());
  return std::max((ze.values() - grid.z.values()).cwiseAbs().maxCoeff(),
                  (le.values() - grid.l.values()).cwiseAbs().maxCoeff());
}

ComparisonReport oracle(Rng& rng, const SuiteOptions&, double) {
  const std::size_t d = pick(rng, 1, 5);
  const ReflectionMatrix r = random_reflection_matrix(rng, d);
  // Breakpoints at random times, so kinks fall between oracle grid points.
  const std::size_t segments = 100;
  std::vector<double> breaks{0.0, 1.0};
  for (std::size_t k = 1; k < segments; ++k) breaks.push_back(uniform(rng, 0.0, 1.0));
  std::sort(breaks.begin(), breaks.end());
  std::vector<std::size_t> axes(segments);
  std::vector<double> slopes(segments);
  for (std::size_t k = 0; k < segments; ++k) {
    axes[k] = pick(rng, 0, d - 1);
    slopes[k] = uniform(rng, -3.0, 2.0);
  }
  const RegularPath x(random_orthant_point(rng, d), std::move(breaks), std::move(axes), std::move(slopes));
  const SkorokhodSolution exact = solve_regular(r, x);
  ViolationTracker tr;
  for (const auto& [steps, bound, rel] : {std::tuple<std::size_t, double, const char*>{10'000, 1e-3, "sup|exact-grid|<=1e-3 (dt=1e-4)"},
                                          {100'000, 1e-4, "sup|exact-grid|<=1e-4 (dt=1e-5)"}}) {
    const SkorokhodSolution grid = solve_grid_oracle(r, x.sample(uniform_grid(1.0, steps)), 1e-8);
    tr.record(grid_distance(exact, grid) - bound, 1.0, 0, rel);
  }
  return tr.report(0.0);
}

ComparisonReport gap_srbm(Rng& rng, const SuiteOptions&, double tol) {
  const std::size_t n = pick(rng, 2, 5);
  const CbpSpec s = random_cbp_spec(rng, n, 1000);
  const SimulationOptions opts;
  const ParticleSystemSolution cbp = simulate_cbp(s, opts);

  const GapSrbmCheck c = check_gap_srbm(s, cbp, opts);

  ViolationTracker tr;
  tr.record(c.factor_residual - tol, 0.0, 0, "FF'=A");
  tr.record(c.z_distance - tol, 0.0, 0, "Z_cbp=Z_srbm");
  tr.record(c.l_distance - tol, 0.0, 0, "L_cbp=L_srbm");
  return tr.report(0.0);
}

ComparisonReport convergence(Rng&, const SuiteOptions& o, double) {
  Matrix m(3, 3);
  m << 1.0, -0.3, -0.2, -0.25, 1.0, -0.3, -0.2, -0.35, 1.0;
  const ReflectionMatrix r(m);
  BrownianSpec spec;
  spec.dim = 3;
  spec.drift = Vector(3);
  spec.drift << -0.5, -0.3, -0.4;
  spec.covariance = Matrix(3, 3);
  spec.covariance << 1.0, 0.2, 0.0, 0.2, 1.0, -0.1, 0.0, -0.1, 1.0;
  spec.horizon = 1.0;
  spec.steps = 4096;
  spec.seed = o.seed;
  const SampledPath b = sample_brownian(spec);
  Vector z0(3);
  z0 << 0.2, 0.0, 0.5;
  Matrix xv = b.values();
  xv.colwise() += z0;
  const SampledPath x(b.times(), std::move(xv));
  const SkorokhodSolution ref = solve_grid_oracle(r, x, 1e-12);

  ViolationTracker tr;
  double prev = std::numeric_limits<double>::infinity();
  double first = 0.0;
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const SkorokhodSolution sol = solve_continuous(r, x, n);
    const double err = std::max(sup_distance(sol.z, ref.z), sup_distance(sol.l, ref.l));
    if (n == 8) first = err;
    else tr.record(err - prev, 1.0, n, "error non-increasing");
    prev = err;
  }
  tr.record(prev - first / 2.0, 1.0, 64, "error(64)<=error(8)/2");
  return tr.report(0.0);
}

struct SuiteDef {
  Instance run;
  std::size_t count;
  double tol;
};

const std::map<std::string, SuiteDef>& registry() {
  static const std::map<std::string, SuiteDef> reg{
      {"thm31", {thm31, 200, exact_tolerance}},
      {"thm32", {thm32, 200, exact_tolerance}},
      {"right-removal", {right_removal, 100, grid_tolerance}},
      {"left-removal", {left_removal, 100, grid_tolerance}},
      {"two-sided-removal", {two_sided_removal, 100, grid_tolerance}},
      {"initial-shift", {initial_shift, 100, grid_tolerance}},
      {"q-increase", {q_increase, 100, grid_tolerance}},
      {"drift", {drift, 100, grid_tolerance}},
      {"counterexample", {counterexample, 1, 1e-12}},
      {"matrix-lemmas", {matrix_lemmas, 500, exact_tolerance}},
      {"identities", {identities, 200, 1e-12}},
      {"oracle", {oracle, 100, 0.0}},
      {"gap-srbm", {gap_srbm, 50, 1e-8}},
      {"convergence", {convergence, 1, 0.0}},
  };
  return reg;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"thm31",          "thm32",        "right-removal", "left-removal",
                                              "two-sided-removal", "initial-shift", "q-increase",  "drift",
                                              "counterexample", "matrix-lemmas", "identities",    "oracle",
                                              "gap-srbm",       "convergence"};
  return names;
}

std::size_t default_count(const std::string& suite) {
  const auto it = registry().find(suite);
  if (it == registry().end()) throw ParameterError("unknown suite '" + suite + "'");
  return it->second.count;
}

SuiteResult run_suite(const std::string& name, const SuiteOptions& opts) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ParameterError("unknown suite '" + name + "'");
  const SuiteDef& def = it->second;
  const std::size_t count = opts.count == 0 ? def.count : opts.count;
  const double tol = opts.tol == 0.0 ? def.tol : opts.tol;

  SuiteResult res;
  res.name = name;
  const auto start = std::chrono::steady_clock::now();
  bool first = true;
  for (std::size_t k = 0; k < count; ++k) {
    InstanceReport inst;
    inst.index = k;
    const std::uint64_t seed = derive_seed(opts.seed, k);
    Rng rng(seed);
    try {
      inst.report = def.run(rng, opts, tol);
    } catch (const Error& e) {
      inst.error = e.what();
      inst.error_kind = e.kind();
      inst.report.passed = false;
      inst.report.tol = tol;
      inst.report.location.relation = "error";
      ++res.errors;
    }
    inst.report.seed = seed;
    if (inst.error.empty()) {
      if (!inst.report.passed) ++res.failures;
      if (first || inst.report.max_violation > res.max_violation) res.max_violation = inst.report.max_violation;
      first = false;
    }
    res.instances.push_back(std::move(inst));
  }
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

}  // namespace obliq
