#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace obliq {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Nonempty, strictly increasing subset of {0, ..., base_dim - 1}.
///
/// Indices are zero-based in the API; serialized forms (CSV headers, event
/// sidecars, CLI reports) use one-based positions.
class IndexSet {
public:
  IndexSet(std::size_t base_dim, std::vector<std::size_t> members);

  static IndexSet full(std::size_t base_dim);
  /// Contiguous block first..last, both inclusive.
  static IndexSet range(std::size_t base_dim, std::size_t first, std::size_t last);

  std::size_t base_dim() const noexcept { return base_dim_; }
  std::size_t size() const noexcept { return members_.size(); }
  const std::vector<std::size_t>& members() const noexcept { return members_; }
  std::size_t operator[](std::size_t k) const { return members_[k]; }

  bool contains(std::size_t index) const;
  bool is_full() const noexcept { return members_.size() == base_dim_; }
  /// Empty when this set is the full index range.
  std::optional<IndexSet> complement() const;

  auto begin() const noexcept { return members_.begin(); }
  auto end() const noexcept { return members_.end(); }

private:
  std::size_t base_dim_;
  std::vector<std::size_t> members_;
};

struct MatrixTolerances {
  /// Slack for "diagonal equals 1" and "off-diagonal <= 0".
  double sign = 1e-10;
  /// Accept only when spectral_radius(Q) < 1 - radius_margin.
  double radius_margin = 1e-8;
};

enum class MatrixCondition { none, unit_diagonal, off_diagonal_sign, spectral_radius };

struct ValidationReport {
  bool accepted = false;
  MatrixCondition failed = MatrixCondition::none;
  std::string reason;
  /// Perron root of Q = I - M; NaN when validation stopped before computing it.
  double spectral_radius = 0.0;
};

std::string to_string(MatrixCondition condition);

/// Checks the reflection nonsingular M-matrix conditions in order: unit
/// diagonal, nonpositive off-diagonal, spectral_radius(I - M) < 1 - margin.
/// The report names the first violated condition.
///
/// Throws DimensionError for non-square input and InvalidEntryError for
/// NaN/Inf entries; every other failure is a rejection, not an exception.
ValidationReport validate_reflection_m_matrix(const Matrix& m, const MatrixTolerances& tol = {});

/// Perron root of a nonnegative square matrix.
///
/// The matrix is split into strongly connected blocks (Frobenius normal form);
/// each irreducible block is iterated as B + I, which is primitive, and the
/// Collatz-Wielandt bounds min/max (Sx)_i / x_i bracket its root. Returns the
/// bracket midpoint once the bracket is narrower than 2 * tol.
///
/// Throws ConvergenceError (with the last two bracket ends) after max_iter
/// iterations on one block, PreconditionError if q has a negative entry.
double spectral_radius_nonneg(const Matrix& q, double tol = 1e-12, std::size_t max_iter = 200000);

/// A validated reflection nonsingular M-matrix R = I - Q.
///
/// Construction snaps entries within the sign tolerance (exact unit diagonal,
/// off-diagonal clamped to <= 0) so downstream code can rely on the sign
/// pattern exactly.
class ReflectionMatrix {
public:
  explicit ReflectionMatrix(const Matrix& r, const MatrixTolerances& tol = {});

  static ReflectionMatrix identity(std::size_t dim);

  std::size_t dim() const noexcept { return static_cast<std::size_t>(r_.rows()); }
  const Matrix& matrix() const noexcept { return r_; }
  double operator()(std::size_t i, std::size_t j) const { return r_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)); }
  /// Q = I - R, nonnegative with zero diagonal.
  Matrix q() const;
  double spectral_radius() const noexcept { return radius_; }

  /// [R]_J; always valid again (principal submatrices of this class stay in it).
  ReflectionMatrix principal(const IndexSet& j) const;

private:
  Matrix r_;
  double radius_;
};

/// R^{-1} = sum_k Q^k, truncated once the added term's max-norm drops below tol.
Matrix neumann_inverse(const ReflectionMatrix& r, double tol = 1e-14, std::size_t max_terms = 10'000'000);

/// [M]_{rows, cols}, entries taken in increasing index order.
Matrix principal_submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols);
Matrix principal_submatrix(const Matrix& m, const IndexSet& rows_and_cols);
Vector restrict(const Vector& v, const IndexSet& indices);

/// Entrywise a <= b within tol.
bool entrywise_leq(const Matrix& a, const Matrix& b, double tol = 0.0);

struct MatrixLemmaReport {
  /// [R]_J validates as a reflection nonsingular M-matrix.
  bool submatrix_valid = false;
  /// max over entries of -[R]_J^{-1}: positive when the lower bound 0 fails.
  double submatrix_inverse_negativity = 0.0;
  /// max of [R]_J^{-1} - [R^{-1}]_J: positive when the upper bound fails.
  double submatrix_inverse_excess = 0.0;
  /// max of Rbar^{-1} - R^{-1} and of -Rbar^{-1}: positive when R^{-1} >= Rbar^{-1} >= 0 fails.
  double inverse_order_violation = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

/// Evaluates the principal-submatrix and inverse-order lemmas for R <= Rbar.
/// Throws PreconditionError when the dimensions differ or R is not <= Rbar.
MatrixLemmaReport check_matrix_lemmas(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                      const IndexSet& j, double tol);

// Violations below are max(lhs - rhs) of an entrywise relation lhs <= rhs;
// a value <= 0 means the relation holds. Inputs must be nonnegative.

/// [A]_{IJ} [B]_{JK} <= [AB]_{IK}.
double submatrix_product_violation(const Matrix& a, const Matrix& b, const IndexSet& i,
                                   const IndexSet& j, const IndexSet& k);
/// For A >= B >= 0 and C >= D >= 0: BD <= AC and 0 <= BD (returned as the worse of the two).
double product_order_violation(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d);
/// [A]_J [a]_J <= [A a]_J for nonnegative A and a.
double restricted_action_violation(const Matrix& a, const Vector& v, const IndexSet& j);

}  // namespace obliq
