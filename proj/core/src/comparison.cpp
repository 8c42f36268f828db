#include "obliq/comparison.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// Largest |Z - (X_{k+1} - X_k) - R L| over a particle solution's times.
double gap_identity_residual(const CollisionParams& q, const ParticleSystemSolution& sol) {
  const ReflectionMatrix r = reflection_matrix_from_params(q);
  const auto d = idx(q.size() - 1);
  const Matrix& x = sol.x.values();
  const Matrix dx = x.bottomRows(d) - x.topRows(d);
  return (sol.z.values() - dx - r.matrix() * sol.l.values()).cwiseAbs().maxCoeff();
}

void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

void require_dominated(const SampledPath& x, const SampledPath& xbar, const char* who) {
  const DominationCheck dom = increments_dominated(x, xbar);
  if (!dom.dominated) {
    const auto& v = *dom.violation;
    std::ostringstream os;
    os << who << ": driver increments not dominated on [" << v.s << ", " << v.t << "] in component "
       << v.component + 1 << " (by " << v.margin << ")";
    throw PreconditionError(os.str());
  }
}

void require_matrix_order(const ReflectionMatrix& r, const ReflectionMatrix& rbar, const char* who) {
  require(r.dim() == rbar.dim(), std::string(who) + ": matrices differ in dimension");
  const Matrix diff = r.matrix() - rbar.matrix();
  for (Eigen::Index i = 0; i < diff.rows(); ++i)
    for (Eigen::Index j = 0; j < diff.cols(); ++j)
      if (diff(i, j) > 1e-12) {
        std::ostringstream os;
        os << who << ": R <= Rbar fails at entry (" << i + 1 << "," << j + 1 << ")";
        throw PreconditionError(os.str());
      }
}

void require_qplus_order(const CollisionParams& q, const CollisionParams& qbar, const char* who) {
  require(q.size() == qbar.size(), std::string(who) + ": systems differ in size");
  for (std::size_t k = 1; k < q.size(); ++k)
    if (q.qplus(k) > qbar.qplus(k) + 1e-12) {
      std::ostringstream os;
      os << who << ": q+_" << k + 1 << " exceeds qbar+_" << k + 1;
      throw PreconditionError(os.str());
    }
}

// Both drivers on the union of their breakpoints (exact for regular paths).
std::pair<SampledPath, SampledPath> common_grid(const RegularPath& x, const RegularPath& xbar) {
  if (std::abs(x.horizon() - xbar.horizon()) > 1e-12 * std::max(1.0, x.horizon()))
    throw AlignmentError("drivers have different horizons");
  std::vector<double> t = union_times(x.breakpoints(), xbar.breakpoints());
  t.back() = std::min(x.horizon(), xbar.horizon());
  while (t.size() > 2 && t[t.size() - 2] >= t.back()) t.erase(t.end() - 2);
  return {x.sample(t), xbar.sample(t)};
}

std::vector<double> merged_times(const SampledPath& a, const SampledPath& b) {
  std::vector<double> t = union_times(a.times(), b.times());
  t.back() = std::min(a.horizon(), b.horizon());
  while (t.size() > 2 && t[t.size() - 2] >= t.back()) t.erase(t.end() - 2);
  return t;
}

}  // namespace

void ViolationTracker::record(double margin, double t, std::size_t component, const std::string& relation) {
  if (!seen_ || margin > worst_) {
    seen_ = true;
    worst_ = margin;
    where_ = {t, component, relation};
  }
}

void ViolationTracker::merge(const ComparisonReport& other) {
  record(other.max_violation, other.location.t, other.location.component, other.location.relation);
}

ComparisonReport ViolationTracker::report(double tol) const {
  ComparisonReport rep;
  rep.tol = tol;
  if (seen_) {
    rep.max_violation = worst_;
    rep.location = where_;
  } else {
    rep.location.relation = "none";
  }
  rep.passed = rep.max_violation <= tol;
  return rep;
}

void compare_gap_solutions(ViolationTracker& tracker, const SampledPath& z, const SampledPath& l,
                           const SampledPath& zbar, const SampledPath& lbar, std::size_t first) {
  if (first + zbar.dim() > z.dim()) throw DimensionError("compare_gap_solutions: component range");
  const std::vector<double> t = merged_times(z, zbar);
  const Matrix zz = resample(z, t).values();
  const Matrix ll = resample(l, t).values();
  const Matrix zb = resample(zbar, t).values();
  const Matrix lb = resample(lbar, t).values();
  for (std::size_t c = 0; c < zbar.dim(); ++c) {
    const auto row = idx(first + c);
    for (std::size_t k = 0; k < t.size(); ++k) {
      tracker.record(zz(row, idx(k)) - zb(idx(c), idx(k)), t[k], first + c, "Z<=Zbar");
      if (k == 0) continue;
      const double inc = ll(row, idx(k)) - ll(row, idx(k - 1));
      const double inc_bar = lb(idx(c), idx(k)) - lb(idx(c), idx(k - 1));
      tracker.record(inc_bar - inc, t[k], first + c, "dL>=dLbar");
    }
  }
}

void compare_positions(ViolationTracker& tracker, const SampledPath& y, const SampledPath& ybar,
                       std::size_t first, bool y_below) {
  if (first + ybar.dim() > y.dim()) throw DimensionError("compare_positions: component range");
  const std::vector<double> t = merged_times(y, ybar);
  const Matrix yy = resample(y, t).values();
  const Matrix yb = resample(ybar, t).values();
  const double sign = y_below ? 1.0 : -1.0;
  const std::string rel = y_below ? "Y<=Ybar" : "Y>=Ybar";
  for (std::size_t c = 0; c < ybar.dim(); ++c)
    for (std::size_t k = 0; k < t.size(); ++k)
      tracker.record(sign * (yy(idx(first + c), idx(k)) - yb(idx(c), idx(k))), t[k], first + c, rel);
}

ComparisonReport check_skorokhod_comparison(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                            const RegularPath& x, const RegularPath& xbar, double tol) {
  require_matrix_order(r, rbar, "check_skorokhod_comparison");
  require(x.dim() == r.dim() && xbar.dim() == r.dim(), "check_skorokhod_comparison: driver dimension");
  require((x.start().array() >= 0.0).all() && (xbar.start().array() >= 0.0).all(),
          "check_skorokhod_comparison: drivers must start in the orthant");
  const auto [xs, xbs] = common_grid(x, xbar);
  require_dominated(xs, xbs, "check_skorokhod_comparison");
  const SkorokhodSolution sol = solve_regular(r, x);
  const SkorokhodSolution bar = solve_regular(rbar, xbar);
  ViolationTracker tr;
  compare_gap_solutions(tr, sol.z, sol.l, bar.z, bar.l);
  return tr.report(tol);
}

ComparisonReport check_skorokhod_comparison(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                            const SampledPath& x, const SampledPath& xbar, double tol,
                                            const SimulationOptions& opts) {
  require_matrix_order(r, rbar, "check_skorokhod_comparison");
  require(x.dim() == r.dim() && xbar.dim() == r.dim(), "check_skorokhod_comparison: driver dimension");
  require((x.start().array() >= 0.0).all() && (xbar.start().array() >= 0.0).all(),
          "check_skorokhod_comparison: drivers must start in the orthant");
  require_dominated(x, xbar, "check_skorokhod_comparison");
  const SkorokhodSolution sol = solve_sampled(r, x, opts);
  const SkorokhodSolution bar = solve_sampled(rbar, xbar, opts);
  ViolationTracker tr;
  compare_gap_solutions(tr, sol.z, sol.l, bar.z, bar.l);
  return tr.report(tol);
}

ComparisonReport check_particle_comparison(const CollisionParams& q, const CollisionParams& qbar,
                                           const RegularPath& x, const RegularPath& xbar, double tol) {
  require_qplus_order(q, qbar, "check_particle_comparison");
  const auto [xs, xbs] = common_grid(x, xbar);
  require_dominated(xs, xbs, "check_particle_comparison");
  const ParticleSystemSolution sol = solve_competing(q, x);
  const ParticleSystemSolution bar = solve_competing(qbar, xbar);
  ViolationTracker tr;
  compare_positions(tr, sol.y, bar.y);
  return tr.report(tol);
}

ComparisonReport check_particle_comparison(const CollisionParams& q, const CollisionParams& qbar,
                                           const SampledPath& x, const SampledPath& xbar, double tol,
                                           const SimulationOptions& opts) {
  require_qplus_order(q, qbar, "check_particle_comparison");
  require_dominated(x, xbar, "check_particle_comparison");
  const ParticleSystemSolution sol = solve_competing(q, x, opts);
  const ParticleSystemSolution bar = solve_competing(qbar, xbar, opts);
  ViolationTracker tr;
  compare_positions(tr, sol.y, bar.y);
  return tr.report(tol);
}

ComparisonReport check_particle_comparison_linear(const CollisionParams& q, const CollisionParams& qbar,
                                                  const Vector& y0, const Vector& y0bar, std::size_t i,
                                                  double slope, double slope_bar, double horizon,
                                                  double tol) {
  require_qplus_order(q, qbar, "check_particle_comparison_linear");
  require(y0.size() == y0bar.size(), "check_particle_comparison_linear: start sizes differ");
  for (Eigen::Index k = 0; k < y0.size(); ++k)
    require(y0(k) <= y0bar(k), "check_particle_comparison_linear: y0 <= y0bar fails");
  require(slope <= slope_bar, "check_particle_comparison_linear: slope exceeds slope_bar");
  const ParticleSystemSolution sol = solve_regular_linear(q, y0, i, slope, horizon);
  const ParticleSystemSolution bar = solve_regular_linear(qbar, y0bar, i, slope_bar, horizon);
  ViolationTracker tr;
  compare_positions(tr, sol.y, bar.y);
  return tr.report(tol);
}

ComparisonReport check_removal_corollaries(const CbpSpec& spec, std::size_t lo, std::size_t hi, double tol,
                                           const SimulationOptions& opts) {
  const CbpSpec sub = subsystem_spec(spec, lo, hi);
  const ParticleSystemSolution full = simulate_cbp(spec, opts);
  const ParticleSystemSolution part = simulate_cbp(sub, opts);
  const std::size_t n = spec.size();
  ViolationTracker tr;
  compare_gap_solutions(tr, full.z, full.l, part.z, part.l, lo);
  const bool upper_removed = hi + 1 < n;
  const bool lower_removed = lo > 0;
  if (!lower_removed) compare_positions(tr, full.y, part.y, lo, true);
  if (!upper_removed) compare_positions(tr, full.y, part.y, lo, false);
  const double resid = std::max(gap_identity_residual(spec.q, full), gap_identity_residual(sub.q, part));
  return tr.report(tol + 2.0 * resid);
}

ComparisonReport check_initial_shift(const CbpSpec& spec, const std::optional<Vector>& y0bar,
                                     const std::optional<Vector>& z0bar, double tol,
                                     const SimulationOptions& opts) {
  require(y0bar || z0bar, "check_initial_shift: need y0bar or z0bar");
  validate_cbp_spec(spec);
  const ParticleSystemSolution base = simulate_cbp(spec, opts);
  double resid = gap_identity_residual(spec.q, base);
  ViolationTracker tr;
  const auto n = spec.y0.size();
  if (y0bar) {
    require(y0bar->size() == n, "check_initial_shift: y0bar size");
    for (Eigen::Index k = 0; k < n; ++k)
      require(spec.y0(k) <= (*y0bar)(k), "check_initial_shift: y0 <= y0bar fails");
    CbpSpec shifted = spec;
    shifted.y0 = *y0bar;
    const ParticleSystemSolution bar = simulate_cbp(shifted, opts);
    resid = std::max(resid, gap_identity_residual(spec.q, bar));
    compare_positions(tr, base.y, bar.y);
  }
  if (z0bar) {
    require(z0bar->size() == n - 1, "check_initial_shift: z0bar size");
    CbpSpec shifted = spec;
    shifted.y0(0) = spec.y0(0);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      require(spec.y0(k + 1) - spec.y0(k) <= (*z0bar)(k), "check_initial_shift: Z(0) <= z0bar fails");
      shifted.y0(k + 1) = shifted.y0(k) + (*z0bar)(k);
    }
    const ParticleSystemSolution bar = simulate_cbp(shifted, opts);
    resid = std::max(resid, gap_identity_residual(spec.q, bar));
    compare_gap_solutions(tr, base.z, base.l, bar.z, bar.l);
  }
  return tr.report(tol + 2.0 * resid);
}

ComparisonReport check_parameter_monotonicity(const CbpSpec& spec, const CollisionParams& qbar,
                                              const Vector& gbar, double tol, const SimulationOptions& opts) {
  validate_cbp_spec(spec);
  const std::size_t n = spec.size();
  require(qbar.size() == n && static_cast<std::size_t>(gbar.size()) == n,
          "check_parameter_monotonicity: parameter sizes");
  bool qplus_up = true;
  for (std::size_t k = 1; k < n; ++k) qplus_up = qplus_up && spec.q.qplus(k) <= qbar.qplus(k) + 1e-12;
  bool drift_up = true;
  for (std::size_t k = 0; k < n; ++k) drift_up = drift_up && spec.g(idx(k)) <= gbar(idx(k));
  const bool same_q = (spec.q.qplus() - qbar.qplus()).cwiseAbs().maxCoeff() <= 1e-15 &&
                      (spec.q.qminus() - qbar.qminus()).cwiseAbs().maxCoeff() <= 1e-15;
  bool gap_drift_up = true;
  for (std::size_t k = 0; k + 1 < n; ++k)
    gap_drift_up = gap_drift_up &&
                   spec.g(idx(k + 1)) - spec.g(idx(k)) <= gbar(idx(k + 1)) - gbar(idx(k)) + 1e-15;
  const bool positions = qplus_up && drift_up;
  const bool gaps = same_q && gap_drift_up;
  require(positions || gaps,
          "check_parameter_monotonicity: neither (qbar+ >= q+ and gbar >= g) nor (qbar = q and dominated gap drift)");

  CbpSpec bar_spec = spec;
  bar_spec.q = qbar;
  bar_spec.g = gbar;
  const ParticleSystemSolution base = simulate_cbp(spec, opts);
  const ParticleSystemSolution bar = simulate_cbp(bar_spec, opts);
  ViolationTracker tr;
  if (positions) compare_positions(tr, base.y, bar.y);
  if (gaps) compare_gap_solutions(tr, base.z, base.l, bar.z, bar.l);
  const double resid = std::max(gap_identity_residual(spec.q, base), gap_identity_residual(qbar, bar));
  return tr.report(tol + 2.0 * resid);
}

Counterexample counterexample_positive_offdiag(double r21, std::size_t samples) {
  if (!(r21 > 0.0) || !std::isfinite(r21)) throw ParameterError("counterexample: r21 must be positive");
  if (samples < 2) throw ParameterError("counterexample: need at least two samples");
  Counterexample out;
  out.r21 = r21;
  out.times = uniform_grid(1.0, samples - 1);
  const auto m = idx(samples);
  out.z = Matrix::Zero(2, m);
  out.l = Matrix::Zero(2, m);
  out.zbar = Matrix::Zero(2, m);
  out.lbar = Matrix::Zero(2, m);
  Matrix r(2, 2);
  r << 1.0, 0.0, r21, 1.0;
  out.violation_certified = true;
  for (Eigen::Index k = 0; k < m; ++k) {
    const double t = out.times[static_cast<std::size_t>(k)];
    out.z.col(k) << 0.0, 1.0 + r21 * t;
    out.l.col(k) << t, 0.0;
    out.zbar.col(k) << 1.0 - t, 1.0;
    Vector x(2), xbar(2);
    x << -t, 1.0;
    xbar << 1.0 - t, 1.0;
    const double res = std::max((out.z.col(k) - x - r * out.l.col(k)).cwiseAbs().maxCoeff(),
                                (out.zbar.col(k) - xbar - r * out.lbar.col(k)).cwiseAbs().maxCoeff());
    out.identity_residual = std::max(out.identity_residual, res);
    if (t > 0.0 && !(out.z(1, k) > out.zbar(1, k))) out.violation_certified = false;
  }
  out.margin_at_end = out.z(1, m - 1) - out.zbar(1, m - 1);
  return out;
}

GapSrbmCheck check_gap_srbm(const CbpSpec& spec, const ParticleSystemSolution& cbp,
                            const SimulationOptions& opts) {
  const std::size_t n = spec.size();
  if (n < 2) throw ParameterError("gap check needs at least two particles");
  const ReflectionMatrix r = reflection_matrix_from_params(spec.q);
  const GapCoefficients gc = gap_drift_and_covariance(spec.g, spec.sigma2);
  const auto d = static_cast<Eigen::Index>(n - 1);
  Matrix diff = Matrix::Zero(d, d + 1);
  for (Eigen::Index k = 0; k < d; ++k) {
    diff(k, k) = -1.0;
    diff(k, k + 1) = 1.0;
  }
  const Matrix factor = diff * spec.sigma2.cwiseSqrt().asDiagonal();
  const Vector z0 = spec.y0.tail(d) - spec.y0.head(d);
  const SkorokhodSolution srbm = simulate_srbm_driven(r, gc.mu, factor, cbp_noise(spec), z0, opts);

  GapSrbmCheck out;
  out.factor_residual = (factor * factor.transpose() - gc.a).cwiseAbs().maxCoeff();
  out.z_distance = sup_distance(cbp.z, srbm.z);
  out.l_distance = sup_distance(cbp.l, srbm.l);
  return out;
}

}  // namespace obliq
