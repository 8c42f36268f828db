#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "obliq/mmatrix.hpp"
#include "obliq/paths.hpp"
#include "obliq/skorokhod.hpp"

namespace obliq {

struct ParamsReport {
  bool accepted = false;
  std::string reason;
};

/// Checks 0 < q+_k, q-_k < 1 and q+_{k+1} + q-_k = 1 (within 1e-12).
ParamsReport validate_collision_params(const Vector& qplus, const Vector& qminus);

/// Collision parameters (q+_k, q-_k), k = 0..N-1. q+_0 and q-_{N-1} never
/// act on the system but are still required to lie in (0, 1).
class CollisionParams {
public:
  /// Throws ValidationError with the report's reason.
  CollisionParams(Vector qplus, Vector qminus);

  /// q+ = q- = 1/2.
  static CollisionParams symmetric(std::size_t n);

  std::size_t size() const noexcept { return static_cast<std::size_t>(qplus_.size()); }
  const Vector& qplus() const noexcept { return qplus_; }
  const Vector& qminus() const noexcept { return qminus_; }
  double qplus(std::size_t k) const { return qplus_(static_cast<Eigen::Index>(k)); }
  double qminus(std::size_t k) const { return qminus_(static_cast<Eigen::Index>(k)); }

  /// Parameters of ranks lo..hi (inclusive).
  CollisionParams restrict(std::size_t lo, std::size_t hi) const;

  friend bool operator==(const CollisionParams& a, const CollisionParams& b) {
    return a.qplus_ == b.qplus_ && a.qminus_ == b.qminus_;
  }

private:
  Vector qplus_;
  Vector qminus_;
};

/// Gap reflection matrix (N-1 x N-1): unit diagonal, R(k, k+1) = -q-_{k+1},
/// R(k+1, k) = -q+_{k+1}.
ReflectionMatrix reflection_matrix_from_params(const CollisionParams& q);

struct GapCoefficients {
  Vector mu;
  Matrix a;
};

/// mu_k = g_{k+1} - g_k; A tridiagonal with A(k,k) = s_k + s_{k+1}, A(k,k+1) = -s_{k+1}.
GapCoefficients gap_drift_and_covariance(const Vector& g, const Vector& sigma2);

/// alpha_0 = 1, alpha_{k+1} = alpha_k q-_k / q+_{k+1}. sum_k alpha_k Y_k is free of collision terms.
Vector alphas(const CollisionParams& q);

/// Ranks reversed and q+ / q- swapped: qt+_n = q-_{N-1-n}, qt-_n = q+_{N-1-n}.
CollisionParams invert_system(const CollisionParams& q);

/// One phase of solve_regular_linear: ranks lo..hi move together.
struct BlockPhase {
  double t0 = 0.0;
  double t1 = 0.0;
  std::size_t lo = 0;
  std::size_t hi = 0;
  /// S = sum over the block of alpha_m / alpha_lo; the block speed is slope / S.
  double mass = 1.0;
  double speed = 0.0;
};

struct ParticleSystemSolution {
  /// Ranked positions (N).
  SampledPath y;
  /// Collision terms L_{(k,k+1)} (N-1).
  SampledPath l;
  /// Gaps Y_{k+1} - Y_k (N-1).
  SampledPath z;
  /// Driving path on the same grid.
  SampledPath x;
  /// Changes of the set of zero gaps.
  std::vector<BoundaryEvent> events;
  /// Gap-level phases (active = zero gaps, l_slope = collision rates).
  std::vector<Phase> phases;
  /// Filled by solve_regular_linear only.
  std::vector<BlockPhase> blocks;
  std::string route;

  std::size_t size() const noexcept { return y.dim(); }
};

/// Exact solution for X_i(t) = y_i + slope t, other components constant.
/// Throws OrderingError for unordered y0 and IndexError for i >= N.
ParticleSystemSolution solve_regular_linear(const CollisionParams& q, const Vector& y0, std::size_t i,
                                            double slope, double horizon);

/// Exact solution for a regular driver (solved on the gap process).
ParticleSystemSolution solve_competing(const CollisionParams& q, const RegularPath& x);
/// Sampled driver: n = 0 solves the interpolated driver exactly; n >= 1 uses
/// the regular approximation of the gap driver at level n.
ParticleSystemSolution solve_competing(const CollisionParams& q, const SampledPath& x, std::size_t n);
ParticleSystemSolution solve_competing(const CollisionParams& q, const SampledPath& x,
                                       const SimulationOptions& opts);

/// max over recorded times of |sum_k alpha_k (Y_k - X_k)|.
double alpha_weight_residual(const CollisionParams& q, const ParticleSystemSolution& sol);

struct CbpSpec {
  Vector g;
  Vector sigma2;
  CollisionParams q = CollisionParams::symmetric(2);
  Vector y0;
  double horizon = 1.0;
  std::size_t steps = 1000;
  std::uint64_t seed = 0;
  /// Particle k uses noise stream noise_offset + k.
  std::size_t noise_offset = 0;
  /// Drive with B = 0 (deterministic drift only).
  bool zero_noise = false;

  std::size_t size() const noexcept { return static_cast<std::size_t>(y0.size()); }
};

/// Throws on inconsistent sizes, nonpositive sigma2 or unordered y0.
void validate_cbp_spec(const CbpSpec& spec);

/// Standard Brownian components B driving the spec (zeros when zero_noise).
SampledPath cbp_noise(const CbpSpec& spec);
/// X_k(t) = y_k + g_k t + sigma_k B_k(t).
SampledPath cbp_driver(const CbpSpec& spec);

ParticleSystemSolution simulate_cbp(const CbpSpec& spec, const SimulationOptions& opts = {});

/// Ranks lo..hi (inclusive, lo < hi) with the same seed and noise streams.
CbpSpec subsystem_spec(const CbpSpec& spec, std::size_t lo, std::size_t hi);

}  // namespace obliq
