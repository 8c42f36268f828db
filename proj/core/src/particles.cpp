#include "obliq/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_ordered(const Vector& y, const char* what) {
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (!std::isfinite(y(k))) throw InvalidEntryError(std::string(what) + ": positions must be finite");
  for (Eigen::Index k = 1; k < y.size(); ++k)
    if (y(k) < y(k - 1)) {
      std::ostringstream os;
      os << what << ": starting positions not ordered at ranks " << k << " and " << k + 1;
      throw OrderingError(os.str());
    }
}

}  // namespace

ParamsReport validate_collision_params(const Vector& qplus, const Vector& qminus) {
  ParamsReport rep;
  if (qplus.size() != qminus.size()) throw DimensionError("collision parameters: q+ and q- differ in length");
  if (qplus.size() < 2) throw DimensionError("collision parameters: need at least two particles");
  const auto n = qplus.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (const auto& [name, v] : {std::pair{"q+", qplus(k)}, std::pair{"q-", qminus(k)}}) {
      if (!std::isfinite(v)) throw InvalidEntryError("collision parameters: non-finite entry");
      if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream os;
        os << "parameter out of (0,1): " << name << "_" << k + 1 << " = " << v;
        rep.reason = os.str();
        return rep;
      }
    }
  }
  for (Eigen::Index k = 0; k + 1 < n; ++k) {
    const double s = qplus(k + 1) + qminus(k);
    if (std::abs(s - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "q+_" << k + 2 << " + q-_" << k + 1 << " = " << s << " != 1";
      rep.reason = os.str();
      return rep;
    }
  }
  rep.accepted = true;
  return rep;
}

CollisionParams::CollisionParams(Vector qplus, Vector qminus)
    : qplus_(std::move(qplus)), qminus_(std::move(qminus)) {
  const ParamsReport rep = validate_collision_params(qplus_, qminus_);
  if (!rep.accepted) throw ValidationError(rep.reason);
}

CollisionParams CollisionParams::symmetric(std::size_t n) {
  return CollisionParams(Vector::Constant(idx(n), 0.5), Vector::Constant(idx(n), 0.5));
}

CollisionParams CollisionParams::restrict(std::size_t lo, std::size_t hi) const {
  if (!(lo < hi && hi < size())) throw RangeError("CollisionParams::restrict: need lo < hi < N");
  const auto len = idx(hi - lo + 1);
  return CollisionParams(qplus_.segment(idx(lo), len), qminus_.segment(idx(lo), len));
}

ReflectionMatrix reflection_matrix_from_params(const CollisionParams& q) {
  const std::size_t d = q.size() - 1;
  Matrix r = Matrix::Identity(idx(d), idx(d));
  for (std::size_t k = 0; k + 1 < d; ++k) {
    r(idx(k), idx(k + 1)) = -q.qminus(k + 1);
    r(idx(k + 1), idx(k)) = -q.qplus(k + 1);
  }
  return ReflectionMatrix(r);
}

GapCoefficients gap_drift_and_covariance(const Vector& g, const Vector& sigma2) {
  if (g.size() != sigma2.size()) throw DimensionError("gap_drift_and_covariance: g and sigma2 differ in length");
  if (g.size() < 2) throw DimensionError("gap_drift_and_covariance: need at least two particles");
  if ((sigma2.array() <= 0.0).any() || !sigma2.allFinite())
    throw ParameterError("gap_drift_and_covariance: sigma2 must be positive");
  const auto d = g.size() - 1;
  GapCoefficients out{g.tail(d) - g.head(d), Matrix::Zero(d, d)};
  for (Eigen::Index k = 0; k < d; ++k) {
    out.a(k, k) = sigma2(k) + sigma2(k + 1);
    if (k + 1 < d) {
      out.a(k, k + 1) = -sigma2(k + 1);
      out.a(k + 1, k) = -sigma2(k + 1);
    }
  }
  return out;
}

Vector alphas(const CollisionParams& q) {
  Vector a(idx(q.size()));
  a(0) = 1.0;
  for (std::size_t k = 0; k + 1 < q.size(); ++k) a(idx(k + 1)) = a(idx(k)) * q.qminus(k) / q.qplus(k + 1);
  return a;
}

CollisionParams invert_system(const CollisionParams& q) {
  return CollisionParams(q.qminus().reverse(), q.qplus().reverse());
}

namespace {

ParticleSystemSolution invert_solution(ParticleSystemSolution s) {
  const std::size_t n = s.size();
  const std::size_t d = n - 1;
  auto flip = [](const SampledPath& p, double sign) {
    return SampledPath(p.times(), sign * p.values().colwise().reverse());
  };
  auto flip_set = [d](std::vector<std::size_t> v) {
    for (auto& k : v) k = d - 1 - k;
    std::sort(v.begin(), v.end());
    return v;
  };
  ParticleSystemSolution out{flip(s.y, -1.0), flip(s.l, 1.0), flip(s.z, 1.0), flip(s.x, -1.0), {}, {}, {},
                             s.route};
  for (auto& e : s.events) out.events.push_back({e.tau, flip_set(e.active_before), flip_set(e.active_after)});
  for (auto& p : s.phases)
    out.phases.push_back({p.t0, p.t1, p.segment, flip_set(p.active), p.l_slope.reverse(), p.z_slope.reverse()});
  for (auto& b : s.blocks) out.blocks.push_back({b.t0, b.t1, n - 1 - b.hi, n - 1 - b.lo, b.mass, -b.speed});
  return out;
}

}  // namespace

ParticleSystemSolution solve_regular_linear(const CollisionParams& q, const Vector& y0, std::size_t i,
                                            double slope, double horizon) {
  const std::size_t n = q.size();
  if (static_cast<std::size_t>(y0.size()) != n) throw DimensionError("solve_regular_linear: y0 size");
  if (i >= n) throw IndexError("solve_regular_linear: moving rank out of range");
  if (!std::isfinite(slope)) throw InvalidEntryError("solve_regular_linear: slope must be finite");
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw ParameterError("solve_regular_linear: horizon must be positive");
  check_ordered(y0, "solve_regular_linear");

  if (slope < 0.0) {
    const Vector yt = -y0.reverse();
    ParticleSystemSolution s = solve_regular_linear(invert_system(q), yt, n - 1 - i, -slope, horizon);
    return invert_solution(std::move(s));
  }

  const std::size_t d = n - 1;
  const Vector a = alphas(q);
  Vector y = y0;
  Vector l = Vector::Zero(idx(d));
  std::vector<double> times{0.0};
  std::vector<double> ybuf(y.data(), y.data() + n);
  std::vector<double> lbuf(l.data(), l.data() + d);
  ParticleSystemSolution out{SampledPath::constant(y0, horizon), SampledPath::constant(l, horizon),
                             SampledPath::constant(l, horizon), SampledPath::constant(y0, horizon), {}, {}, {},
                             "exact-linear"};

  std::size_t lo = i;
  std::size_t hi = i;
  while (hi + 1 < n && y(idx(hi + 1)) == y(idx(lo))) ++hi;

  std::vector<std::size_t> last_active;
  double t = 0.0;
  const double eps_t = 1e-12 * horizon;
  while (t < horizon) {
    double mass = 0.0;
    for (std::size_t m = lo; m <= hi; ++m) mass += a(idx(m)) / a(idx(lo));
    const double speed = slope / mass;

    Vector rate = Vector::Zero(idx(d));
    if (hi > lo) {
      rate(idx(hi - 1)) = speed / q.qplus(hi);
      for (std::size_t m = hi - 1; m > lo; --m)
        rate(idx(m - 1)) = (speed + q.qminus(m) * rate(idx(m))) / q.qplus(m);
    }

    double dt = std::numeric_limits<double>::infinity();
    if (hi + 1 < n && speed > 0.0) dt = (y(idx(hi + 1)) - y(idx(lo))) / speed;
    const bool at_end = t + dt >= horizon - eps_t;
    const double tend = at_end ? horizon : t + dt;

    std::vector<std::size_t> active;
    Vector zslope = Vector::Zero(idx(d));
    for (std::size_t k = 0; k < d; ++k) {
      const bool opening = speed > 0.0 && lo > 0 && k == lo - 1;
      if (y(idx(k + 1)) == y(idx(k)) && !opening) active.push_back(k);
    }
    if (speed > 0.0) {
      if (lo > 0) zslope(idx(lo - 1)) = speed;
      if (hi + 1 < n) zslope(idx(hi)) = -speed;
    }
    if (!out.phases.empty() && active != last_active) out.events.push_back({t, last_active, active});
    last_active = active;
    out.phases.push_back({t, tend, 0, active, rate, zslope});
    out.blocks.push_back({t, tend, lo, hi, mass, speed});

    const bool merge = !at_end || (hi + 1 < n && speed > 0.0 && t + dt <= horizon + eps_t);
    const double pos = merge ? y(idx(hi + 1)) : y(idx(lo)) + speed * (tend - t);
    for (std::size_t m = lo; m <= hi; ++m) y(idx(m)) = pos;
    l += rate * (tend - t);
    if (merge)
      while (hi + 1 < n && y(idx(hi + 1)) == pos) ++hi;

    times.push_back(tend);
    ybuf.insert(ybuf.end(), y.data(), y.data() + n);
    lbuf.insert(lbuf.end(), l.data(), l.data() + d);
    t = tend;
    if (out.phases.size() > n + 1) throw SolverError("solve_regular_linear: phase limit exceeded");
  }

  const auto cols = idx(times.size());
  Matrix yv = Eigen::Map<const Matrix>(ybuf.data(), idx(n), cols);
  Matrix lv = Eigen::Map<const Matrix>(lbuf.data(), idx(d), cols);
  Matrix zv = yv.bottomRows(idx(d)) - yv.topRows(idx(d));
  Matrix xv = y0.replicate(1, cols);
  for (Eigen::Index k = 0; k < cols; ++k) xv(idx(i), k) = y0(idx(i)) + slope * times[static_cast<std::size_t>(k)];
  out.y = SampledPath(times, std::move(yv));
  out.l = SampledPath(times, std::move(lv));
  out.z = SampledPath(times, std::move(zv));
  out.x = SampledPath(std::move(times), std::move(xv));
  return out;
}

namespace {

// Positions from the driver and the collision terms:
// Y_k = X_k + q+_k L_{(k-1,k)} - q-_k L_{(k,k+1)}.
ParticleSystemSolution assemble(const CollisionParams& q, const SampledPath& x, SkorokhodSolution gap,
                                bool exact) {
  const std::size_t n = q.size();
  const std::vector<double> times = union_times(x.times(), gap.l.times());
  const SampledPath xs = resample(x, times);
  const SampledPath ls = resample(gap.l, times);
  const SampledPath zs = resample(gap.z, times);
  Matrix y = xs.values();
  const Matrix& l = ls.values();
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) y.row(idx(k)) += q.qplus(k) * l.row(idx(k - 1));
    if (k + 1 < n) y.row(idx(k)) -= q.qminus(k) * l.row(idx(k));
  }
  if (exact) {
    // Rounding can open a zero gap by an ulp; tied ranks share one value.
    const Matrix& z = zs.values();
    for (Eigen::Index c = 0; c < y.cols(); ++c)
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (z(idx(k), c) == 0.0 || y(idx(k + 1), c) < y(idx(k), c)) y(idx(k + 1), c) = y(idx(k), c);
  }
  ParticleSystemSolution out{SampledPath(times, std::move(y)), ls, zs, xs, std::move(gap.events),
                             std::move(gap.phases), {}, gap.diagnostics.route};
  return out;
}

void check_start(const CollisionParams& q, const Vector& x0, const char* what) {
  if (static_cast<std::size_t>(x0.size()) != q.size()) {
    std::ostringstream os;
    os << what << ": driver has " << x0.size() << " components for " << q.size() << " particles";
    throw DimensionError(os.str());
  }
  check_ordered(x0, what);
}

}  // namespace

ParticleSystemSolution solve_competing(const CollisionParams& q, const RegularPath& x) {
  check_start(q, x.start(), "solve_competing");
  const SampledPath xs = x.to_sampled();
  SkorokhodSolution gap = solve_interpolated(reflection_matrix_from_params(q), difference_path(xs));
  // Evaluate X exactly on the solution's times rather than interpolating knots.
  const SampledPath exact_x = x.sample(gap.l.times());
  ParticleSystemSolution out = assemble(q, exact_x, std::move(gap), true);
  out.route = "exact-regular";
  return out;
}

ParticleSystemSolution solve_competing(const CollisionParams& q, const SampledPath& x, std::size_t n) {
  SimulationOptions opts;
  opts.method = n == 0 ? SolveMethod::interpolated : SolveMethod::continuous;
  opts.level = n;
  return solve_competing(q, x, opts);
}

ParticleSystemSolution solve_competing(const CollisionParams& q, const SampledPath& x,
                                       const SimulationOptions& opts) {
  check_start(q, x.start(), "solve_competing");
  const ReflectionMatrix r = reflection_matrix_from_params(q);
  SkorokhodSolution gap = solve_sampled(r, difference_path(x), opts);
  return assemble(q, x, std::move(gap), opts.method == SolveMethod::interpolated);
}

double alpha_weight_residual(const CollisionParams& q, const ParticleSystemSolution& sol) {
  const Vector a = alphas(q);
  const Matrix diff = sol.y.values() - sol.x.values();
  const Eigen::RowVectorXd w = a.transpose() * diff;
  return w.cwiseAbs().maxCoeff();
}

void validate_cbp_spec(const CbpSpec& spec) {
  const std::size_t n = spec.size();
  if (n < 2) throw DimensionError("CbpSpec: need at least two particles");
  if (static_cast<std::size_t>(spec.g.size()) != n || static_cast<std::size_t>(spec.sigma2.size()) != n ||
      spec.q.size() != n)
    throw DimensionError("CbpSpec: g, sigma2, q and y0 must all have N entries");
  if (!spec.g.allFinite()) throw InvalidEntryError("CbpSpec: drift must be finite");
  if ((spec.sigma2.array() <= 0.0).any() || !spec.sigma2.allFinite())
    throw ParameterError("CbpSpec: diffusion coefficients must be positive");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon)) throw ParameterError("CbpSpec: horizon must be positive");
  if (spec.steps == 0) throw ParameterError("CbpSpec: steps must be at least 1");
  check_ordered(spec.y0, "CbpSpec");
}

SampledPath cbp_noise(const CbpSpec& spec) {
  validate_cbp_spec(spec);
  if (spec.zero_noise)
    return SampledPath(uniform_grid(spec.horizon, spec.steps), Matrix::Zero(idx(spec.size()), idx(spec.steps + 1)));
  return sample_standard_noise(spec.size(), spec.horizon, spec.steps, spec.seed, spec.noise_offset);
}

SampledPath cbp_driver(const CbpSpec& spec) {
  return cbp_driving_path(spec.y0, spec.g, spec.sigma2.cwiseSqrt(), cbp_noise(spec));
}

ParticleSystemSolution simulate_cbp(const CbpSpec& spec, const SimulationOptions& opts) {
  return solve_competing(spec.q, cbp_driver(spec), opts);
}

CbpSpec subsystem_spec(const CbpSpec& spec, std::size_t lo, std::size_t hi) {
  validate_cbp_spec(spec);
  if (!(lo < hi && hi < spec.size())) throw RangeError("subsystem_spec: need lo < hi < N");
  CbpSpec out = spec;
  const auto len = idx(hi - lo + 1);
  out.g = spec.g.segment(idx(lo), len);
  out.sigma2 = spec.sigma2.segment(idx(lo), len);
  out.y0 = spec.y0.segment(idx(lo), len);
  out.q = spec.q.restrict(lo, hi);
  out.noise_offset = spec.noise_offset + lo;
  return out;
}

}  // namespace obliq
