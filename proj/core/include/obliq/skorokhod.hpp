#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "obliq/mmatrix.hpp"
#include "obliq/paths.hpp"

namespace obliq {

/// Change of the boundary set between two consecutive phases.
struct BoundaryEvent {
  double tau = 0.0;
  std::vector<std::size_t> active_before;
  std::vector<std::size_t> active_after;
};

/// Interval on which Z and L are linear with a fixed set of components held at zero.
struct Phase {
  double t0 = 0.0;
  double t1 = 0.0;
  /// Index of the driving segment (or grid step) the phase belongs to.
  std::size_t segment = 0;
  std::vector<std::size_t> active;
  Vector l_slope;
  Vector z_slope;
};

struct SolverDiagnostics {
  std::string route;
  /// Fixed-point sweeps (grid oracle only).
  std::size_t iterations = 0;
  double last_change = 0.0;
  std::vector<double> change_history;
  /// Components held at zero with no push of their own (zero entry of the
  /// boundary-term slope on the active set, other than the moving axis).
  std::vector<std::size_t> flagged;
};

struct SkorokhodSolution {
  SampledPath z;
  SampledPath l;
  std::vector<BoundaryEvent> events;
  std::vector<Phase> phases;
  SolverDiagnostics diagnostics;

  std::size_t dim() const noexcept { return z.dim(); }
  double horizon() const noexcept { return z.horizon(); }
};

/// Exact solution for X(t) = x + alpha t e_i on [0, T].
///
/// `active0`, when given, must be the zero set of x; it exists so callers that
/// track the boundary set can assert it. Throws DomainError if x leaves the
/// orthant or active0 disagrees with x.
SkorokhodSolution solve_linear_segment(const ReflectionMatrix& r, const Vector& x, std::size_t i,
                                       double alpha, double horizon,
                                       const std::optional<IndexSet>& active0 = std::nullopt);

/// Exact solution for a regular driving path, segment by segment.
SkorokhodSolution solve_regular(const ReflectionMatrix& r, const RegularPath& x);

/// Exact solution for the piecewise-linear interpolation of a sampled path.
///
/// Steps need not be axis-parallel: on each phase the boundary-term slope is
/// the solution of the linear complementarity problem on the zero set.
SkorokhodSolution solve_interpolated(const ReflectionMatrix& r, const SampledPath& x);

/// Fixed-point iteration L <- max_{s <= t} (-X + Q L)^+ on the grid of X, from L = 0.
/// Throws ConvergenceError when sup-change is still >= tol after max_iter sweeps.
SkorokhodSolution solve_grid_oracle(const ReflectionMatrix& r, const SampledPath& x, double tol = 1e-10,
                                    std::size_t max_iter = 100000);

/// solve_regular on standard_regular_approximation(x, n).
SkorokhodSolution solve_continuous(const ReflectionMatrix& r, const SampledPath& x, std::size_t n);

template <class Path>
struct Restart {
  /// X_T(t) = X(T + t) - X(T) + Z(T) on [0, horizon - T].
  Path path;
  Vector z;
  /// L(T); the restarted boundary terms are L(T + t) - L(T).
  Vector l;
};

/// Inputs for restarting at time T in [0, horizon).
Restart<RegularPath> restart_inputs(const ReflectionMatrix& r, const RegularPath& x,
                                    const SkorokhodSolution& sol, double t);
Restart<SampledPath> restart_inputs(const ReflectionMatrix& r, const SampledPath& x,
                                    const SkorokhodSolution& sol, double t);

enum class SolveMethod { continuous, interpolated, grid };

std::string to_string(SolveMethod method);
/// Accepts "continuous", "exact" (alias of continuous), "interpolated", "grid".
SolveMethod parse_solve_method(const std::string& name);

struct SimulationOptions {
  SolveMethod method = SolveMethod::continuous;
  /// Approximation level for the continuous route; 0 means one window per grid step.
  std::size_t level = 0;
  double grid_tol = 1e-10;
  std::size_t max_iter = 100000;
};

SkorokhodSolution solve_sampled(const ReflectionMatrix& r, const SampledPath& x,
                                const SimulationOptions& opts);

/// SRBM from z0: driving path z0 + B(t) with B ~ (spec.drift, spec.covariance).
SkorokhodSolution simulate_srbm(const ReflectionMatrix& r, const BrownianSpec& spec, const Vector& z0,
                                const SimulationOptions& opts = {});

/// SRBM driven by z0 + mu t + F W(t) for a given standard noise W (F is d x dim W).
SkorokhodSolution simulate_srbm_driven(const ReflectionMatrix& r, const Vector& mu, const Matrix& factor,
                                       const SampledPath& noise, const Vector& z0,
                                       const SimulationOptions& opts = {});

struct SolutionResidual {
  /// max |Z - X - R L| over the solution's times.
  double identity = 0.0;
  /// max(0, -min Z).
  double negativity = 0.0;
  /// Largest decrease of any L_i between consecutive times.
  double l_decrease = 0.0;
  /// Largest Z_i on a step where L_i grows by more than growth_floor.
  double complementarity = 0.0;
};

SolutionResidual solution_residual(const ReflectionMatrix& r, const SampledPath& x,
                                   const SkorokhodSolution& sol, double growth_floor = 1e-12);
SolutionResidual solution_residual(const ReflectionMatrix& r, const RegularPath& x,
                                   const SkorokhodSolution& sol, double growth_floor = 1e-12);

}  // namespace obliq
