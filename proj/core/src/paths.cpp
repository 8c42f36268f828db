#include "obliq/paths.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

double time_slack(double horizon) { return 1e-12 * std::max(1.0, std::abs(horizon)); }

// Index k of the grid cell [t_k, t_{k+1}] containing t.
std::size_t locate(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  auto k = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
  return std::min(k, times.size() - 2);
}

double clamp_time(const std::vector<double>& times, double t) {
  const double horizon = times.back();
  if (!(t >= -time_slack(horizon) && t <= horizon + time_slack(horizon))) {
    std::ostringstream os;
    os << "time " << t << " outside [0, " << horizon << "]";
    throw RangeError(os.str());
  }
  return std::clamp(t, 0.0, horizon);
}

void check_grid(const std::vector<double>& times, const char* what) {
  if (times.size() < 2) throw ParameterError(std::string(what) + ": need at least two grid times");
  if (times.front() != 0.0) throw ParameterError(std::string(what) + ": grid must start at t = 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ParameterError(std::string(what) + ": grid times must be strictly increasing");
}

}  // namespace

// --- SampledPath -----------------------------------------------------------

SampledPath::SampledPath(std::vector<double> times, Matrix values)
    : times_(std::move(times)), values_(std::move(values)) {
  check_grid(times_, "SampledPath");
  if (values_.rows() < 1) throw DimensionError("SampledPath: dimension must be at least 1");
  if (static_cast<std::size_t>(values_.cols()) != times_.size())
    throw DimensionError("SampledPath: one value column per grid time required");
  if (!values_.allFinite()) throw InvalidEntryError("SampledPath: values must be finite");
}

SampledPath SampledPath::constant(const Vector& value, double horizon) {
  if (!(horizon > 0.0)) throw ParameterError("SampledPath::constant: horizon must be positive");
  Matrix v(value.size(), 2);
  v.col(0) = value;
  v.col(1) = value;
  return SampledPath({0.0, horizon}, std::move(v));
}

Vector SampledPath::evaluate(double t) const {
  t = clamp_time(times_, t);
  const std::size_t k = locate(times_, t);
  const double t0 = times_[k];
  const double t1 = times_[k + 1];
  if (t == t0) return value(k);
  if (t == t1) return value(k + 1);
  const double w = (t - t0) / (t1 - t0);
  return (1.0 - w) * values_.col(idx(k)) + w * values_.col(idx(k + 1));
}

// --- RegularPath -----------------------------------------------------------

RegularPath::RegularPath(Vector start, std::vector<double> breakpoints, std::vector<std::size_t> axes,
                         std::vector<double> slopes)
    : breakpoints_(std::move(breakpoints)), axes_(std::move(axes)), slopes_(std::move(slopes)) {
  check_grid(breakpoints_, "RegularPath");
  if (start.size() < 1) throw DimensionError("RegularPath: dimension must be at least 1");
  const std::size_t segs = breakpoints_.size() - 1;
  if (axes_.size() != segs || slopes_.size() != segs)
    throw DimensionError("RegularPath: need one axis and one slope per segment");
  knots_.resize(start.size(), idx(segs + 1));
  knots_.col(0) = start;
  for (std::size_t k = 0; k < segs; ++k) {
    if (axes_[k] >= static_cast<std::size_t>(start.size()))
      throw IndexError("RegularPath: axis index out of range");
    if (!std::isfinite(slopes_[k])) throw InvalidEntryError("RegularPath: slopes must be finite");
    knots_.col(idx(k + 1)) = knots_.col(idx(k));
    knots_(idx(axes_[k]), idx(k + 1)) += slopes_[k] * (breakpoints_[k + 1] - breakpoints_[k]);
  }
  check_invariants();
}

RegularPath RegularPath::from_knots(std::vector<double> breakpoints, std::vector<std::size_t> axes,
                                    Matrix knots) {
  RegularPath p;
  p.breakpoints_ = std::move(breakpoints);
  p.axes_ = std::move(axes);
  p.knots_ = std::move(knots);
  check_grid(p.breakpoints_, "RegularPath");
  const std::size_t segs = p.breakpoints_.size() - 1;
  if (p.axes_.size() != segs || static_cast<std::size_t>(p.knots_.cols()) != segs + 1)
    throw DimensionError("RegularPath: need one axis per segment and one knot per breakpoint");
  if (p.knots_.rows() < 1) throw DimensionError("RegularPath: dimension must be at least 1");
  p.slopes_.resize(segs);
  for (std::size_t k = 0; k < segs; ++k) {
    if (p.axes_[k] >= p.dim()) throw IndexError("RegularPath: axis index out of range");
    for (std::size_t j = 0; j < p.dim(); ++j)
      if (j != p.axes_[k] && p.knots_(idx(j), idx(k)) != p.knots_(idx(j), idx(k + 1)))
        throw ParameterError("RegularPath: knots move off the segment axis");
    const auto a = idx(p.axes_[k]);
    p.slopes_[k] = (p.knots_(a, idx(k + 1)) - p.knots_(a, idx(k))) /
                   (p.breakpoints_[k + 1] - p.breakpoints_[k]);
  }
  p.check_invariants();
  return p;
}

void RegularPath::check_invariants() const {
  if (!knots_.allFinite()) throw InvalidEntryError("RegularPath: values must be finite");
}

Vector RegularPath::evaluate(double t) const {
  t = clamp_time(breakpoints_, t);
  const std::size_t k = locate(breakpoints_, t);
  if (t == breakpoints_[k]) return knot(k);
  if (t == breakpoints_[k + 1]) return knot(k + 1);
  Vector v = knot(k);
  v(idx(axes_[k])) += slopes_[k] * (t - breakpoints_[k]);
  return v;
}

SampledPath RegularPath::to_sampled() const { return SampledPath(breakpoints_, knots_); }

SampledPath RegularPath::sample(const std::vector<double>& times) const {
  Matrix v(idx(dim()), idx(times.size()));
  for (std::size_t k = 0; k < times.size(); ++k) v.col(idx(k)) = evaluate(times[k]);
  return SampledPath(times, std::move(v));
}

bool coupled(const RegularPath& a, const RegularPath& b) {
  return a.dim() == b.dim() && a.breakpoints() == b.breakpoints() && a.axes() == b.axes();
}

// --- randomness ------------------------------------------------------------

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> uniform_grid(double horizon, std::size_t steps) {
  if (!(horizon > 0.0)) throw ParameterError("uniform_grid: horizon must be positive");
  if (steps == 0) throw ParameterError("uniform_grid: steps must be at least 1");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k)
    t[k] = horizon * static_cast<double>(k) / static_cast<double>(steps);
  t.back() = horizon;
  return t;
}

Matrix covariance_factor(const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw DimensionError("covariance_factor: A must be square");
  if (!a.allFinite()) throw InvalidEntryError("covariance_factor: non-finite entry");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw MatrixError("covariance_factor: A must be symmetric");
  const Matrix sym = 0.5 * (a + a.transpose());

  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() == Eigen::Success) {
    Vector lambda = eig.eigenvalues();
    if (lambda.minCoeff() < -1e-12 * scale)
      throw MatrixError("covariance_factor: A is not positive semidefinite");
    lambda = lambda.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
  }
  // Triangular fallback: A = P' L D L' P, F = P' L sqrt(D).
  Eigen::LDLT<Matrix> ldlt(sym);
  if (ldlt.info() != Eigen::Success) throw MatrixError("covariance_factor: factorization failed");
  Vector diag = ldlt.vectorD();
  if (diag.minCoeff() < -1e-12 * scale)
    throw MatrixError("covariance_factor: A is not positive semidefinite");
  Matrix l = ldlt.matrixL();
  Matrix f = ldlt.transpositionsP().transpose() * (l * diag.cwiseMax(0.0).cwiseSqrt().asDiagonal());
  return f;
}

SampledPath sample_standard_noise(std::size_t dim, double horizon, std::size_t steps,
                                  std::uint64_t seed, std::size_t stream_offset) {
  if (dim == 0) throw DimensionError("sample_standard_noise: dimension must be positive");
  std::vector<double> times = uniform_grid(horizon, steps);
  Matrix w(idx(dim), idx(steps + 1));
  w.col(0).setZero();
  for (std::size_t c = 0; c < dim; ++c) {
    std::mt19937_64 gen(derive_seed(seed, stream_offset + c));
    std::normal_distribution<double> normal(0.0, 1.0);
    double acc = 0.0;
    for (std::size_t k = 1; k <= steps; ++k) {
      acc += std::sqrt(times[k] - times[k - 1]) * normal(gen);
      w(idx(c), idx(k)) = acc;
    }
  }
  return SampledPath(std::move(times), std::move(w));
}

SampledPath sample_brownian(const BrownianSpec& spec) {
  if (spec.dim == 0) throw DimensionError("sample_brownian: dimension must be positive");
  if (static_cast<std::size_t>(spec.drift.size()) != spec.dim ||
      static_cast<std::size_t>(spec.covariance.rows()) != spec.dim ||
      static_cast<std::size_t>(spec.covariance.cols()) != spec.dim)
    throw DimensionError("sample_brownian: drift/covariance do not match dim");
  const Matrix f = covariance_factor(spec.covariance);
  const SampledPath w = sample_standard_noise(spec.dim, spec.horizon, spec.steps, spec.seed);
  Matrix b = f * w.values();
  for (std::size_t k = 0; k < w.size(); ++k) b.col(idx(k)) += spec.drift * w.times()[k];
  return SampledPath(w.times(), std::move(b));
}

SampledPath cbp_driving_path(const Vector& y0, const Vector& drift, const Vector& sigma,
                             const SampledPath& noise) {
  const Eigen::Index n = y0.size();
  if (drift.size() != n || sigma.size() != n || static_cast<Eigen::Index>(noise.dim()) != n)
    throw DimensionError("cbp_driving_path: y0, drift, sigma and noise must share dimension");
  for (Eigen::Index k = 1; k < n; ++k)
    if (y0(k) < y0(k - 1)) throw OrderingError("cbp_driving_path: y0 must be weakly increasing");
  if ((sigma.array() <= 0.0).any()) throw ParameterError("cbp_driving_path: sigma must be positive");
  Matrix x = sigma.asDiagonal() * noise.values();
  for (std::size_t k = 0; k < noise.size(); ++k) x.col(idx(k)) += y0 + drift * noise.times()[k];
  return SampledPath(noise.times(), std::move(x));
}

SampledPath difference_path(const SampledPath& x) {
  if (x.dim() < 2) throw DimensionError("difference_path: need at least two components");
  const auto n = idx(x.dim());
  Matrix w = x.values().bottomRows(n - 1) - x.values().topRows(n - 1);
  return SampledPath(x.times(), std::move(w));
}

// --- regular approximation -------------------------------------------------

RegularPath standard_regular_approximation(const SampledPath& x, std::size_t n) {
  if (n == 0) throw ParameterError("standard_regular_approximation: n must be at least 1");
  const std::size_t d = x.dim();
  const double horizon = x.horizon();
  const std::size_t segs = n * d;
  std::vector<double> breaks(segs + 1);
  std::vector<std::size_t> axes(segs);
  Matrix knots(idx(d), idx(segs + 1));
  knots.col(0) = x.start();
  for (std::size_t k = 1; k <= n; ++k) {
    const double anchor_time =
        k == n ? horizon : horizon * static_cast<double>(k) / static_cast<double>(n);
    const Vector anchor = x.evaluate(anchor_time);
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t s = (k - 1) * d + j;
      breaks[s + 1] = horizon * static_cast<double>(s + 1) / static_cast<double>(segs);
      axes[s] = j;
      knots.col(idx(s + 1)) = knots.col(idx(s));
      knots(idx(j), idx(s + 1)) = anchor(idx(j));
    }
  }
  breaks[0] = 0.0;
  breaks.back() = horizon;
  return RegularPath::from_knots(std::move(breaks), std::move(axes), std::move(knots));
}

std::pair<RegularPath, RegularPath> coupled_regular_approximation(const SampledPath& x,
                                                                  const SampledPath& xbar,
                                                                  std::size_t n) {
  const DominationCheck check = increments_dominated(x, xbar);
  if (!check.dominated) {
    const auto& v = *check.violation;
    std::ostringstream os;
    os << "coupled_regular_approximation: domination fails on [" << v.s << ", " << v.t
       << "] in component " << v.component + 1 << " by " << v.margin;
    throw DominationError(os.str(), v.s, v.t, v.component);
  }
  return {standard_regular_approximation(x, n), standard_regular_approximation(xbar, n)};
}

DominationCheck increments_dominated(const SampledPath& x, const SampledPath& xbar, double tol) {
  if (x.dim() != xbar.dim()) throw AlignmentError("increments_dominated: dimensions differ");
  if (x.size() != xbar.size()) throw AlignmentError("increments_dominated: grids differ in length");
  for (std::size_t k = 0; k < x.size(); ++k)
    if (std::abs(x.times()[k] - xbar.times()[k]) > time_slack(x.horizon()))
      throw AlignmentError("increments_dominated: grids differ");

  DominationCheck out;
  auto fail = [&](double s, double t, std::size_t c, double margin) {
    out.dominated = false;
    out.violation = DominationViolation{s, t, c, margin};
  };
  for (std::size_t c = 0; c < x.dim(); ++c) {
    const double gap = x.value(0, c) - xbar.value(0, c);
    if (gap > tol) {
      fail(0.0, 0.0, c, gap);
      return out;
    }
  }
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    for (std::size_t c = 0; c < x.dim(); ++c) {
      const double inc = x.value(k + 1, c) - x.value(k, c);
      const double inc_bar = xbar.value(k + 1, c) - xbar.value(k, c);
      if (inc - inc_bar > tol) {
        fail(x.times()[k], x.times()[k + 1], c, inc - inc_bar);
        return out;
      }
    }
  return out;
}

std::vector<double> union_times(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

SampledPath resample(const SampledPath& path, const std::vector<double>& times) {
  Matrix v(idx(path.dim()), idx(times.size()));
  // Both grids are sorted; walk them together instead of bisecting per point.
  std::size_t k = 0;
  const auto& src = path.times();
  for (std::size_t m = 0; m < times.size(); ++m) {
    const double t = clamp_time(src, times[m]);
    while (k + 2 < src.size() && src[k + 1] <= t) ++k;
    const double t0 = src[k];
    const double t1 = src[k + 1];
    if (t <= t0) {
      v.col(idx(m)) = path.values().col(idx(k));
    } else if (t >= t1) {
      v.col(idx(m)) = path.values().col(idx(k + 1));
    } else {
      const double w = (t - t0) / (t1 - t0);
      v.col(idx(m)) = (1.0 - w) * path.values().col(idx(k)) + w * path.values().col(idx(k + 1));
    }
  }
  return SampledPath(times, std::move(v));
}

double sup_distance(const SampledPath& a, const SampledPath& b) {
  if (a.dim() != b.dim()) throw DimensionError("sup_distance: dimensions differ");
  if (std::abs(a.horizon() - b.horizon()) > time_slack(a.horizon()))
    throw AlignmentError("sup_distance: horizons differ");
  std::vector<double> times = union_times(a.times(), b.times());
  times.back() = std::min(a.horizon(), b.horizon());
  while (times.size() > 1 && times[times.size() - 2] >= times.back()) times.erase(times.end() - 2);
  const SampledPath ra = resample(a, times);
  const SampledPath rb = resample(b, times);
  return (ra.values() - rb.values()).cwiseAbs().maxCoeff();
}

}  // namespace obliq
