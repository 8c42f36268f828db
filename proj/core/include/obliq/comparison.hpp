#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "obliq/mmatrix.hpp"
#include "obliq/particles.hpp"
#include "obliq/paths.hpp"
#include "obliq/skorokhod.hpp"

namespace obliq {

struct ComparisonLocation {
  double t = 0.0;
  std::size_t component = 0;
  std::string relation;
};

/// Outcome of a coupled comparison. max_violation is the worst lhs - rhs over
/// every checked relation lhs <= rhs; passed iff max_violation <= tol.
struct ComparisonReport {
  bool passed = true;
  double max_violation = 0.0;
  ComparisonLocation location;
  double tol = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr double exact_tolerance = 1e-9;
inline constexpr double grid_tolerance = 1e-6;

/// Worst-margin accumulator shared by the checkers.
class ViolationTracker {
public:
  void record(double margin, double t, std::size_t component, const std::string& relation);
  void merge(const ComparisonReport& other);
  ComparisonReport report(double tol) const;

private:
  bool seen_ = false;
  double worst_ = 0.0;
  ComparisonLocation where_;
};

/// Records Z(t) - Zbar(t) for components `first..first+Zbar.dim()-1` of Z
/// against all of Zbar, and the per-step L-increment deficit, on the union of
/// both solutions' times.
void compare_gap_solutions(ViolationTracker& tracker, const SampledPath& z, const SampledPath& l,
                           const SampledPath& zbar, const SampledPath& lbar, std::size_t first = 0);
/// Records sign * (Y - Ybar) on components first.., likewise.
void compare_positions(ViolationTracker& tracker, const SampledPath& y, const SampledPath& ybar,
                       std::size_t first = 0, bool y_below = true);

/// Coupled Skorokhod comparison for R <= Rbar and dominated drivers: Z <= Zbar and
/// L increments >= Lbar increments. Regular drivers are solved exactly.
/// Throws PreconditionError when a hypothesis fails.
ComparisonReport check_skorokhod_comparison(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                            const RegularPath& x, const RegularPath& xbar,
                                            double tol = exact_tolerance);
/// Sampled drivers on a common grid, solved by `opts` (grid oracle by default).
ComparisonReport check_skorokhod_comparison(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                            const SampledPath& x, const SampledPath& xbar, double tol,
                                            const SimulationOptions& opts = {SolveMethod::grid});

/// Particle comparison for q+_n <= qbar+_n (n >= 1) and dominated drivers: Y <= Ybar.
ComparisonReport check_particle_comparison(const CollisionParams& q, const CollisionParams& qbar,
                                           const RegularPath& x, const RegularPath& xbar,
                                           double tol = exact_tolerance);
ComparisonReport check_particle_comparison(const CollisionParams& q, const CollisionParams& qbar,
                                           const SampledPath& x, const SampledPath& xbar, double tol,
                                           const SimulationOptions& opts = {SolveMethod::interpolated});
/// Both systems driven along one axis: X = y0 + slope t e_i, Xbar = y0bar + slope_bar t e_i,
/// solved by solve_regular_linear.
ComparisonReport check_particle_comparison_linear(const CollisionParams& q, const CollisionParams& qbar,
                                                  const Vector& y0, const Vector& y0bar, std::size_t i,
                                                  double slope, double slope_bar, double horizon,
                                                  double tol = exact_tolerance);

/// Full system against ranks lo..hi on shared noise. Relations: gaps and
/// collision terms on the retained block always; Y <= Ybar when only upper
/// ranks are removed and Y >= Ybar when only lower ranks are removed.
/// The tolerance used is tol + 2 * (largest identity residual of the two runs).
ComparisonReport check_removal_corollaries(const CbpSpec& spec, std::size_t lo, std::size_t hi,
                                           double tol = grid_tolerance,
                                           const SimulationOptions& opts = {SolveMethod::interpolated});

/// (i) y0bar >= y0 gives Y <= Ybar. (ii) z0bar >= Z(0) gives Z <= Zbar and the
/// L-increment relation; the shifted system starts at y0_1 + cumulative z0bar.
ComparisonReport check_initial_shift(const CbpSpec& spec, const std::optional<Vector>& y0bar,
                                     const std::optional<Vector>& z0bar, double tol = grid_tolerance,
                                     const SimulationOptions& opts = {SolveMethod::interpolated});

/// qbar+ >= q+ together with gbar >= g gives Y <= Ybar. qbar = q with dominated
/// gap drifts gives the gap and collision-term relations. Both are checked when both apply.
ComparisonReport check_parameter_monotonicity(const CbpSpec& spec, const CollisionParams& qbar,
                                              const Vector& gbar, double tol = grid_tolerance,
                                              const SimulationOptions& opts = {SolveMethod::interpolated});

/// Gap process of a CBP run against the SRBM with the derived R, mu and A,
/// driven by the differenced noise of the same run.
struct GapSrbmCheck {
  /// max |F F' - A| for the factor F used to drive the SRBM.
  double factor_residual = 0.0;
  double z_distance = 0.0;
  double l_distance = 0.0;
};

GapSrbmCheck check_gap_srbm(const CbpSpec& spec, const ParticleSystemSolution& cbp,
                            const SimulationOptions& opts = {});

/// Closed-form pair on [0, 1] for R = Rbar = [[1, 0], [r21, 1]], X = (-t, 1),
/// Xbar = (1 - t, 1): Z = (0, 1 + r21 t), L = (t, 0), Zbar = (1 - t, 1), Lbar = 0.
struct Counterexample {
  double r21 = 0.0;
  std::vector<double> times;
  Matrix z;
  Matrix l;
  Matrix zbar;
  Matrix lbar;
  /// Largest |Z - X - R L| (and the same for the bar pair) over the samples.
  double identity_residual = 0.0;
  /// Z_2(1) - Zbar_2(1), equals r21.
  double margin_at_end = 0.0;
  /// Z_2(t) > Zbar_2(t) at every sampled t > 0.
  bool violation_certified = false;
};

/// Throws ParameterError unless r21 > 0 and samples >= 2.
Counterexample counterexample_positive_offdiag(double r21, std::size_t samples = 101);

}  // namespace obliq
