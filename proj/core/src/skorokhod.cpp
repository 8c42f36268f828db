#include "obliq/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Matrix columns_to_matrix(const std::vector<double>& buf, std::size_t rows) {
  const auto cols = idx(buf.size() / rows);
  return Eigen::Map<const Matrix>(buf.data(), idx(rows), cols);
}

Vector solve_block(const Matrix& r, const std::vector<std::size_t>& j, const Vector& rhs) {
  const auto n = idx(j.size());
  Matrix rj(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b) rj(a, b) = r(idx(j[a]), idx(j[b]));
  return rj.partialPivLu().solve(rhs);
}

void check_orthant(const Vector& x, const char* what) {
  for (Eigen::Index k = 0; k < x.size(); ++k)
    if (!(x(k) >= 0.0)) {
      std::ostringstream os;
      os << what << ": starting point leaves the orthant in component " << k + 1 << " (" << x(k) << ")";
      throw DomainError(os.str());
    }
}

// Event-driven solver for a continuous piecewise-linear driver.
//
// Z is carried as X + R L recomputed at every phase end, with components on
// the boundary snapped to exactly 0, so the identity holds to rounding.
class PhaseEngine {
public:
  PhaseEngine(const ReflectionMatrix& r, const Vector& z0) : r_(r.matrix()), d_(r.dim()) {
    z_ = z0;
    l_ = Vector::Zero(idx(d_));
    push_knot(0.0);
  }

  void advance(const Vector& x0, const Vector& x1, double t0, double t1, std::size_t segment) {
    const double len = t1 - t0;
    const Vector v = (x1 - x0) / len;
    const double eps_t = 1e-12 * len;
    const double vscale = v.cwiseAbs().maxCoeff();
    const double eps_w = 1e-12 * vscale;

    std::size_t moving = d_;
    std::size_t nonzero = 0;
    for (std::size_t j = 0; j < d_; ++j)
      if (v(idx(j)) != 0.0) {
        moving = j;
        ++nonzero;
      }
    const bool axis = nonzero <= 1;

    double s = t0;
    const std::size_t guard = 4 * d_ + 8;
    for (std::size_t step = 0; s < t1; ++step) {
      if (step > guard) {
        std::ostringstream os;
        os << "phase limit exceeded on segment " << segment << " at t = " << s;
        throw SolverError(os.str());
      }
      std::vector<std::size_t> zero;
      for (std::size_t j = 0; j < d_; ++j)
        if (z_(idx(j)) == 0.0) zero.push_back(j);

      Vector ell = Vector::Zero(idx(d_));
      std::vector<bool> pinned(d_, false);
      if (axis) {
        const bool pushing = nonzero == 1 && v(idx(moving)) < 0.0 && z_(idx(moving)) == 0.0;
        if (pushing) {
          // Whole zero set held: [L]_J' = |alpha| [R]_J^{-1} [e_i]_J.
          const double speed = -v(idx(moving));
          Vector e = Vector::Zero(idx(zero.size()));
          for (std::size_t a = 0; a < zero.size(); ++a)
            if (zero[a] == moving) e(idx(a)) = 1.0;
          const Vector lj = speed * solve_block(r_, zero, e);
          for (std::size_t a = 0; a < zero.size(); ++a) {
            ell(idx(zero[a])) = std::max(lj(idx(a)), 0.0);
            pinned[zero[a]] = true;
            if (zero[a] != moving && lj(idx(a)) <= 1e-14 * speed) flagged_.insert(zero[a]);
          }
        } else {
          for (std::size_t j : zero) pinned[j] = !(v(idx(j)) > 0.0);
        }
      } else {
        lcp(v, zero, eps_w, ell, pinned);
      }

      Vector w = v + r_ * ell;
      double dt_min = std::numeric_limits<double>::infinity();
      std::vector<double> dt(d_, std::numeric_limits<double>::infinity());
      for (std::size_t j = 0; j < d_; ++j) {
        if (pinned[j]) {
          w(idx(j)) = 0.0;
          continue;
        }
        if (w(idx(j)) < 0.0 && z_(idx(j)) > 0.0) {
          dt[j] = z_(idx(j)) / -w(idx(j));
          dt_min = std::min(dt_min, dt[j]);
        }
      }

      const bool at_end = s + dt_min >= t1 - eps_t;
      const double tend = at_end ? t1 : s + dt_min;
      std::vector<std::size_t> hits;
      for (std::size_t j = 0; j < d_; ++j)
        if (s + dt[j] <= tend + eps_t) hits.push_back(j);

      if (!at_end && tend - s <= eps_t) {
        // Zero-length phase: the hit is immediate.
        for (std::size_t j : hits) z_(idx(j)) = 0.0;
        continue;
      }

      std::vector<std::size_t> active;
      for (std::size_t j = 0; j < d_; ++j)
        if (pinned[j]) active.push_back(j);
      if (have_last_ && active != last_active_) events_.push_back({s, last_active_, active});
      last_active_ = active;
      have_last_ = true;

      l_ += ell * (tend - s);
      const Vector x = at_end ? x1 : Vector(x0 + v * (tend - t0));
      z_ = x + r_ * l_;
      for (std::size_t j = 0; j < d_; ++j)
        if (pinned[j] || z_(idx(j)) < 0.0) z_(idx(j)) = 0.0;
      for (std::size_t j : hits) z_(idx(j)) = 0.0;

      phases_.push_back({s, tend, segment, std::move(active), ell, w});
      push_knot(tend);
      s = tend;
    }
  }

  SkorokhodSolution finish(std::string route) {
    std::vector<double> times = times_;
    SkorokhodSolution sol{SampledPath(times, columns_to_matrix(zbuf_, d_)),
                          SampledPath(std::move(times), columns_to_matrix(lbuf_, d_)),
                          std::move(events_), std::move(phases_), {}};
    sol.diagnostics.route = std::move(route);
    sol.diagnostics.flagged.assign(flagged_.begin(), flagged_.end());
    return sol;
  }

  const Vector& z() const noexcept { return z_; }

private:
  void push_knot(double t) {
    times_.push_back(t);
    zbuf_.insert(zbuf_.end(), z_.data(), z_.data() + z_.size());
    lbuf_.insert(lbuf_.end(), l_.data(), l_.data() + l_.size());
  }

  // Monotone principal pivoting: for a Z-matrix with positive principal
  // minors the added set only grows and ends at the unique LCP solution.
  void lcp(const Vector& v, const std::vector<std::size_t>& zero, double eps_w, Vector& ell,
           std::vector<bool>& pinned) const {
    std::vector<std::size_t> basis;
    Vector w = v;
    for (std::size_t round = 0; round <= zero.size(); ++round) {
      bool grew = false;
      for (std::size_t j : zero)
        if (w(idx(j)) < -eps_w && std::find(basis.begin(), basis.end(), j) == basis.end()) {
          basis.push_back(j);
          grew = true;
        }
      if (!grew) break;
      std::sort(basis.begin(), basis.end());
      Vector rhs(idx(basis.size()));
      for (std::size_t a = 0; a < basis.size(); ++a) rhs(idx(a)) = -v(idx(basis[a]));
      const Vector lj = solve_block(r_, basis, rhs);
      ell.setZero();
      for (std::size_t a = 0; a < basis.size(); ++a) ell(idx(basis[a])) = std::max(lj(idx(a)), 0.0);
      w = v + r_ * ell;
    }
    for (std::size_t j : basis) pinned[j] = true;
    for (std::size_t j : zero)
      if (w(idx(j)) <= eps_w) pinned[j] = true;
  }

  const Matrix& r_;
  std::size_t d_;
  Vector z_;
  Vector l_;
  std::vector<double> times_;
  std::vector<double> zbuf_;
  std::vector<double> lbuf_;
  std::vector<Phase> phases_;
  std::vector<BoundaryEvent> events_;
  std::vector<std::size_t> last_active_;
  bool have_last_ = false;
  std::set<std::size_t> flagged_;
};

void check_dim(const ReflectionMatrix& r, std::size_t d, const char* what) {
  if (r.dim() != d) {
    std::ostringstream os;
    os << what << ": path dimension " << d << " does not match matrix dimension " << r.dim();
    throw DimensionError(os.str());
  }
}

}  // namespace

SkorokhodSolution solve_linear_segment(const ReflectionMatrix& r, const Vector& x, std::size_t i,
                                       double alpha, double horizon,
                                       const std::optional<IndexSet>& active0) {
  check_dim(r, static_cast<std::size_t>(x.size()), "solve_linear_segment");
  if (i >= r.dim()) throw IndexError("solve_linear_segment: axis index out of range");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ParameterError("solve_linear_segment: horizon must be positive");
  if (!std::isfinite(alpha)) throw InvalidEntryError("solve_linear_segment: slope must be finite");
  check_orthant(x, "solve_linear_segment");
  if (active0) {
    if (active0->base_dim() != r.dim()) throw DimensionError("solve_linear_segment: active set dimension");
    for (std::size_t j = 0; j < r.dim(); ++j)
      if (active0->contains(j) != (x(idx(j)) == 0.0))
        throw DomainError("solve_linear_segment: active set does not match the zero set of x");
  }
  Vector x1 = x;
  x1(idx(i)) += alpha * horizon;
  PhaseEngine engine(r, x);
  engine.advance(x, x1, 0.0, horizon, 0);
  return engine.finish("exact-linear");
}

SkorokhodSolution solve_regular(const ReflectionMatrix& r, const RegularPath& x) {
  check_dim(r, x.dim(), "solve_regular");
  check_orthant(x.start(), "solve_regular");
  PhaseEngine engine(r, x.start());
  const auto& b = x.breakpoints();
  for (std::size_t k = 0; k < x.segments(); ++k) engine.advance(x.knot(k), x.knot(k + 1), b[k], b[k + 1], k);
  return engine.finish("exact-regular");
}

SkorokhodSolution solve_interpolated(const ReflectionMatrix& r, const SampledPath& x) {
  check_dim(r, x.dim(), "solve_interpolated");
  check_orthant(x.start(), "solve_interpolated");
  PhaseEngine engine(r, x.start());
  const auto& t = x.times();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) engine.advance(x.value(k), x.value(k + 1), t[k], t[k + 1], k);
  return engine.finish("exact-interpolated");
}

SkorokhodSolution solve_grid_oracle(const ReflectionMatrix& r, const SampledPath& x, double tol,
                                    std::size_t max_iter) {
  check_dim(r, x.dim(), "solve_grid_oracle");
  check_orthant(x.start(), "solve_grid_oracle");
  if (!(tol > 0.0)) throw ParameterError("solve_grid_oracle: tol must be positive");
  if (max_iter == 0) throw ParameterError("solve_grid_oracle: max_iter must be positive");

  const Matrix q = r.q();
  const Matrix& xv = x.values();
  const auto d = xv.rows();
  const auto m = xv.cols();
  Matrix l = Matrix::Zero(d, m);
  Matrix next(d, m);
  SolverDiagnostics diag;
  diag.route = "grid-oracle";
  double previous = std::numeric_limits<double>::infinity();
  double change = std::numeric_limits<double>::infinity();
  const bool coupled_terms = q.cwiseAbs().maxCoeff() > 0.0;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (coupled_terms) {
      next.noalias() = q * l;
      next -= xv;
    } else {
      next = -xv;
    }
    for (Eigen::Index i = 0; i < d; ++i) {
      double run = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        run = std::max(run, next(i, k));
        next(i, k) = run;
      }
    }
    previous = change;
    change = (next - l).cwiseAbs().maxCoeff();
    l.swap(next);
    diag.iterations = it;
    diag.change_history.push_back(change);
    if (change < tol) break;
  }
  diag.last_change = change;
  if (!(change < tol)) {
    std::ostringstream os;
    os << "grid oracle did not reach tol " << tol << " in " << max_iter << " sweeps (last change " << change
       << ")";
    throw ConvergenceError(os.str(), previous, change);
  }
  Matrix z = xv + r.matrix() * l;
  return SkorokhodSolution{SampledPath(x.times(), std::move(z)), SampledPath(x.times(), std::move(l)), {}, {},
                           std::move(diag)};
}

SkorokhodSolution solve_continuous(const ReflectionMatrix& r, const SampledPath& x, std::size_t n) {
  check_dim(r, x.dim(), "solve_continuous");
  SkorokhodSolution sol = solve_regular(r, standard_regular_approximation(x, n));
  sol.diagnostics.route = "exact-continuous";
  return sol;
}

namespace {

void check_restart_time(const SkorokhodSolution& sol, double horizon, double t) {
  if (!(t >= 0.0 && t < horizon) || !(t <= sol.horizon()))
    throw RangeError("restart_inputs: restart time must lie in [0, horizon)");
}

}  // namespace

Restart<RegularPath> restart_inputs(const ReflectionMatrix& r, const RegularPath& x,
                                    const SkorokhodSolution& sol, double t) {
  check_dim(r, x.dim(), "restart_inputs");
  check_restart_time(sol, x.horizon(), t);
  const Vector z = sol.z.evaluate(t);
  const Vector shift = z - x.evaluate(t);
  const auto& b = x.breakpoints();
  std::vector<double> breaks{0.0};
  std::vector<std::size_t> axes;
  std::vector<Vector> knots{z};
  for (std::size_t k = 0; k < x.segments(); ++k) {
    if (b[k + 1] <= t) continue;
    const std::size_t axis = x.axes()[k];
    breaks.push_back(b[k + 1] - t);
    axes.push_back(axis);
    // Only the moving component changes, so the knots stay exactly axis-parallel.
    Vector next = knots.back();
    next(idx(axis)) = x.knot(k + 1)(idx(axis)) + shift(idx(axis));
    knots.push_back(std::move(next));
  }
  Matrix kn(idx(x.dim()), idx(knots.size()));
  for (std::size_t k = 0; k < knots.size(); ++k) kn.col(idx(k)) = knots[k];
  return {RegularPath::from_knots(std::move(breaks), std::move(axes), std::move(kn)), z, sol.l.evaluate(t)};
}

Restart<SampledPath> restart_inputs(const ReflectionMatrix& r, const SampledPath& x,
                                    const SkorokhodSolution& sol, double t) {
  check_dim(r, x.dim(), "restart_inputs");
  check_restart_time(sol, x.horizon(), t);
  const Vector z = sol.z.evaluate(t);
  const Vector shift = z - x.evaluate(t);
  std::vector<double> times{0.0};
  std::vector<Vector> vals{z};
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x.times()[k] <= t) continue;
    times.push_back(x.times()[k] - t);
    vals.push_back(x.value(k) + shift);
  }
  Matrix v(idx(x.dim()), idx(vals.size()));
  for (std::size_t k = 0; k < vals.size(); ++k) v.col(idx(k)) = vals[k];
  return {SampledPath(std::move(times), std::move(v)), z, sol.l.evaluate(t)};
}

std::string to_string(SolveMethod method) {
  switch (method) {
    case SolveMethod::continuous: return "continuous";
    case SolveMethod::interpolated: return "interpolated";
    case SolveMethod::grid: return "grid";
  }
  return "unknown";
}

SolveMethod parse_solve_method(const std::string& name) {
  if (name == "continuous" || name == "exact") return SolveMethod::continuous;
  if (name == "interpolated") return SolveMethod::interpolated;
  if (name == "grid") return SolveMethod::grid;
  throw ParameterError("unknown solve method '" + name + "'");
}

SkorokhodSolution solve_sampled(const ReflectionMatrix& r, const SampledPath& x, const SimulationOptions& opts) {
  switch (opts.method) {
    case SolveMethod::continuous:
      return solve_continuous(r, x, opts.level == 0 ? x.size() - 1 : opts.level);
    case SolveMethod::interpolated: return solve_interpolated(r, x);
    case SolveMethod::grid: return solve_grid_oracle(r, x, opts.grid_tol, opts.max_iter);
  }
  throw ParameterError("unknown solve method");
}

SkorokhodSolution simulate_srbm(const ReflectionMatrix& r, const BrownianSpec& spec, const Vector& z0,
                                const SimulationOptions& opts) {
  check_dim(r, spec.dim, "simulate_srbm");
  if (static_cast<std::size_t>(z0.size()) != spec.dim) throw DimensionError("simulate_srbm: z0 dimension");
  check_orthant(z0, "simulate_srbm");
  const SampledPath b = sample_brownian(spec);
  Matrix v = b.values();
  v.colwise() += z0;
  return solve_sampled(r, SampledPath(b.times(), std::move(v)), opts);
}

SkorokhodSolution simulate_srbm_driven(const ReflectionMatrix& r, const Vector& mu, const Matrix& factor,
                                       const SampledPath& noise, const Vector& z0,
                                       const SimulationOptions& opts) {
  const auto d = idx(r.dim());
  if (mu.size() != d || z0.size() != d || factor.rows() != d ||
      factor.cols() != static_cast<Eigen::Index>(noise.dim()))
    throw DimensionError("simulate_srbm_driven: mu, z0, factor and noise do not conform");
  check_orthant(z0, "simulate_srbm_driven");
  Matrix v = factor * noise.values();
  for (std::size_t k = 0; k < noise.size(); ++k) v.col(idx(k)) += z0 + mu * noise.times()[k];
  return solve_sampled(r, SampledPath(noise.times(), std::move(v)), opts);
}

namespace {

template <class Eval>
SolutionResidual residual_impl(const ReflectionMatrix& r, Eval&& eval, const SkorokhodSolution& sol,
                               double growth_floor) {
  SolutionResidual out;
  const auto& t = sol.z.times();
  const Matrix& z = sol.z.values();
  const Matrix& l = sol.l.values();
  for (std::size_t k = 0; k < t.size(); ++k) {
    const Vector x = eval(t[k]);
    const Vector res = z.col(idx(k)) - x - r.matrix() * l.col(idx(k));
    out.identity = std::max(out.identity, res.cwiseAbs().maxCoeff());
    out.negativity = std::max(out.negativity, -z.col(idx(k)).minCoeff());
    if (k == 0) continue;
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const double inc = l(i, idx(k)) - l(i, idx(k - 1));
      out.l_decrease = std::max(out.l_decrease, -inc);
      if (inc > growth_floor) out.complementarity = std::max(out.complementarity, z(i, idx(k)));
    }
  }
  return out;
}

}  // namespace

SolutionResidual solution_residual(const ReflectionMatrix& r, const SampledPath& x,
                                   const SkorokhodSolution& sol, double growth_floor) {
  return residual_impl(r, [&](double t) { return x.evaluate(t); }, sol, growth_floor);
}

SolutionResidual solution_residual(const ReflectionMatrix& r, const RegularPath& x,
                                   const SkorokhodSolution& sol, double growth_floor) {
  return residual_impl(r, [&](double t) { return x.evaluate(t); }, sol, growth_floor);
}

}  // namespace obliq
