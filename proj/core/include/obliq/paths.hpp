#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "obliq/mmatrix.hpp"

namespace obliq {

/// A continuous path given by its values on a strictly increasing grid
/// 0 = t_0 < ... < t_M = T, linear between grid points.
class SampledPath {
public:
  /// `values` holds one column per grid time (dim x (M+1)).
  SampledPath(std::vector<double> times, Matrix values);

  static SampledPath constant(const Vector& value, double horizon);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t size() const noexcept { return times_.size(); }
  double horizon() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }
  const Matrix& values() const noexcept { return values_; }

  Vector value(std::size_t k) const { return values_.col(static_cast<Eigen::Index>(k)); }
  double value(std::size_t k, std::size_t component) const {
    return values_(static_cast<Eigen::Index>(component), static_cast<Eigen::Index>(k));
  }
  Vector start() const { return value(0); }
  Vector finish() const { return value(size() - 1); }

  /// Linear interpolation; throws RangeError outside [0, T].
  Vector evaluate(double t) const;

private:
  std::vector<double> times_;
  Matrix values_;
};

/// Piecewise-linear path whose k-th piece moves only along axis j_k.
///
/// Stored by its knot values so that evaluation at a breakpoint reproduces
/// the knot bit-for-bit; slopes are derived from consecutive knots.
class RegularPath {
public:
  /// Builds knots by accumulating slope * duration from `start`.
  RegularPath(Vector start, std::vector<double> breakpoints, std::vector<std::size_t> axes,
              std::vector<double> slopes);

  /// Knots given directly; consecutive knots may differ only along the segment's axis.
  static RegularPath from_knots(std::vector<double> breakpoints, std::vector<std::size_t> axes,
                                Matrix knots);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(knots_.rows()); }
  std::size_t segments() const noexcept { return axes_.size(); }
  double horizon() const noexcept { return breakpoints_.back(); }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<std::size_t>& axes() const noexcept { return axes_; }
  const std::vector<double>& slopes() const noexcept { return slopes_; }
  const Matrix& knots() const noexcept { return knots_; }
  Vector start() const { return knots_.col(0); }
  Vector knot(std::size_t k) const { return knots_.col(static_cast<Eigen::Index>(k)); }

  Vector evaluate(double t) const;

  /// The same path as a SampledPath on its own breakpoints (exact).
  SampledPath to_sampled() const;
  /// Values on an arbitrary grid of times in [0, T].
  SampledPath sample(const std::vector<double>& times) const;

private:
  RegularPath() = default;
  void check_invariants() const;

  std::vector<double> breakpoints_;
  std::vector<std::size_t> axes_;
  std::vector<double> slopes_;
  Matrix knots_;
};

/// Shared breakpoints and axis indices.
bool coupled(const RegularPath& a, const RegularPath& b);

struct BrownianSpec {
  std::size_t dim = 1;
  Vector drift;
  Matrix covariance;
  double horizon = 1.0;
  std::size_t steps = 1;
  std::uint64_t seed = 0;
};

/// splitmix64 of (seed, stream): the seed of an independent generator stream.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// t_k = T k / steps, k = 0..steps.
std::vector<double> uniform_grid(double horizon, std::size_t steps);

/// Square-root factor F with F F' = A: symmetric square root, with a
/// pivoted LDL' factor as fallback. Eigenvalues in [-1e-12 scale, 0) are
/// clipped to zero; anything more negative throws MatrixError.
Matrix covariance_factor(const Matrix& a);

/// Independent standard Brownian components on a uniform grid. Component k
/// draws its normals from stream `stream_offset + k` of `seed`, so a subset
/// of components can be regenerated bit-for-bit on its own.
SampledPath sample_standard_noise(std::size_t dim, double horizon, std::size_t steps,
                                  std::uint64_t seed, std::size_t stream_offset = 0);

/// Brownian motion from 0 with drift mu and covariance A: B(t) = mu t + F W(t),
/// W from sample_standard_noise(spec.dim, ..., spec.seed).
SampledPath sample_brownian(const BrownianSpec& spec);

/// X_k(t) = y_k + g_k t + sigma_k B_k(t) on the grid of `noise`.
SampledPath cbp_driving_path(const Vector& y0, const Vector& drift, const Vector& sigma,
                             const SampledPath& noise);

/// (X_2 - X_1, ..., X_N - X_{N-1}) pointwise.
SampledPath difference_path(const SampledPath& x);

/// Standard approximating regular path: n equal subintervals, each swept
/// along axes 1..d in turn so that the result matches X at t = kT/n.
RegularPath standard_regular_approximation(const SampledPath& x, std::size_t n);

/// Standard approximations of a dominated pair; the outputs are coupled and
/// keep the domination. Throws DominationError naming the first failing step.
std::pair<RegularPath, RegularPath> coupled_regular_approximation(const SampledPath& x,
                                                                  const SampledPath& xbar,
                                                                  std::size_t n);

struct DominationViolation {
  double s = 0.0;
  double t = 0.0;
  std::size_t component = 0;
  /// Amount by which the relation failed (> 0).
  double margin = 0.0;
};

struct DominationCheck {
  bool dominated = true;
  std::optional<DominationViolation> violation;
};

/// X(0) <= Xbar(0) and X(t) - X(s) <= Xbar(t) - Xbar(s) for all grid s <= t,
/// checked per adjacent step (equivalent on a common grid). Throws
/// AlignmentError if the grids or dimensions differ.
DominationCheck increments_dominated(const SampledPath& x, const SampledPath& xbar, double tol = 1e-12);

/// Sorted union of two time grids (exact duplicates removed).
std::vector<double> union_times(const std::vector<double>& a, const std::vector<double>& b);
/// Values of `path` at `times` (which must lie in [0, T]).
SampledPath resample(const SampledPath& path, const std::vector<double>& times);
/// Exact sup-norm distance between two piecewise-linear paths: the max over
/// the union of their grids. Horizons must agree.
double sup_distance(const SampledPath& a, const SampledPath& b);

}  // namespace obliq
