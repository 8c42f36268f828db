#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "obliq/comparison.hpp"

namespace obliq {

using Rng = std::mt19937_64;

/// R = I - Q with random sparsity; Q rescaled so spectral_radius(Q) is uniform in [0, max_radius].
ReflectionMatrix random_reflection_matrix(Rng& rng, std::size_t d, double max_radius = 0.9);
/// I - U .* Q with U uniform in [0, 1] entrywise: a valid matrix entrywise >= r.
ReflectionMatrix random_upper_matrix(Rng& rng, const ReflectionMatrix& r);
CollisionParams random_collision_params(Rng& rng, std::size_t n);
/// qbar+_k drawn in [q+_k, 0.99] for k >= 1.
CollisionParams random_dominating_params(Rng& rng, const CollisionParams& q);
/// Weakly increasing vector with about `tie_fraction` of adjacent gaps exactly zero.
Vector random_ordered_point(Rng& rng, std::size_t n, double max_gap = 0.5, double tie_fraction = 0.3);
/// y0 <= y0bar componentwise, y0bar still ordered.
Vector random_upper_ordered_point(Rng& rng, const Vector& y0);
/// Nonnegative point with about `zero_fraction` of entries exactly zero.
Vector random_orthant_point(Rng& rng, std::size_t d, double zero_fraction = 0.4);
/// Axis-parallel path with `segments` pieces on breakpoints kT/segments.
RegularPath random_regular_path(Rng& rng, std::size_t d, std::size_t segments, double horizon = 1.0);
/// Dominated sampled pair on a uniform grid: Xbar a random walk from the
/// orthant, X = Xbar - c - D with c >= 0 constant and D nondecreasing.
std::pair<SampledPath, SampledPath> random_dominated_pair(Rng& rng, std::size_t d, std::size_t steps,
                                                          double horizon = 1.0);
CbpSpec random_cbp_spec(Rng& rng, std::size_t n, std::size_t steps, double horizon = 1.0);

struct SuiteOptions {
  /// 0 selects the suite's default instance count.
  std::size_t count = 0;
  std::uint64_t seed = 1;
  /// 0 selects the suite's default tolerance.
  double tol = 0.0;
  /// Deliberately violate the suite's hypothesis (negative test).
  bool break_hypothesis = false;
};

struct InstanceReport {
  std::size_t index = 0;
  ComparisonReport report;
  /// Set when the instance raised instead of producing a report.
  std::string error;
  std::string error_kind;
};

struct SuiteResult {
  std::string name;
  std::vector<InstanceReport> instances;
  std::size_t failures = 0;
  std::size_t errors = 0;
  double max_violation = 0.0;
  double seconds = 0.0;

  bool passed() const noexcept { return failures == 0 && errors == 0 && !instances.empty(); }
};

/// thm31, thm32, right-removal, left-removal, two-sided-removal, initial-shift,
/// q-increase, drift, counterexample, matrix-lemmas, identities, oracle, gap-srbm, convergence.
const std::vector<std::string>& suite_names();
std::size_t default_count(const std::string& suite);

/// Throws ParameterError for an unknown suite name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& opts = {});

}  // namespace obliq
