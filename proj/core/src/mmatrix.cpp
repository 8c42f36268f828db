#include "obliq/mmatrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "obliq/error.hpp"

namespace obliq {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    std::ostringstream os;
    os << what << ": expected a nonempty square matrix, got " << m.rows() << "x" << m.cols();
    throw DimensionError(os.str());
  }
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i + 1 << "," << j + 1 << ")";
        throw InvalidEntryError(os.str());
      }
}

void require_nonnegative(const Matrix& m, const char* what) {
  if ((m.array() < 0.0).any())
    throw PreconditionError(std::string(what) + ": matrix must be entrywise nonnegative");
}

// Tarjan's algorithm over the graph i -> j whenever q(i, j) > 0.
std::vector<std::vector<std::size_t>> strongly_connected_blocks(const Matrix& q) {
  const auto n = static_cast<std::size_t>(q.rows());
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> blocks;
  int counter = 0;

  std::function<void(std::size_t)> visit = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w = 0; w < n; ++w) {
      if (q(idx(v), idx(w)) <= 0.0) continue;
      if (index[w] < 0) {
        visit(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> block;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        block.push_back(w);
      } while (w != v);
      std::sort(block.begin(), block.end());
      blocks.push_back(std::move(block));
    }
  };
  for (std::size_t v = 0; v < n; ++v)
    if (index[v] < 0) visit(v);
  return blocks;
}

struct PerronBracket {
  double lower = 0.0;
  double upper = 0.0;
  bool converged = false;
};

// Collatz-Wielandt iteration on B + I for an irreducible block B.
PerronBracket block_bracket(const Matrix& block, double tol, std::size_t max_iter) {
  const Eigen::Index k = block.rows();
  if (k == 1) {
    const double r = block(0, 0);
    return {r, r, true};
  }
  Matrix shifted = block + Matrix::Identity(k, k);
  Vector x = Vector::Ones(k);
  PerronBracket br;
  for (std::size_t it = 0; it < max_iter; ++it) {
    Vector y = shifted * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double ratio = y(i) / x(i);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    br.lower = std::max(lo - 1.0, 0.0);
    br.upper = hi - 1.0;
    if (br.upper - br.lower <= 2.0 * tol) {
      br.converged = true;
      return br;
    }
    x = y / y.maxCoeff();
  }
  return br;
}

// Radius bracket of the whole matrix: the max over irreducible blocks.
PerronBracket radius_bracket(const Matrix& q, double tol, std::size_t max_iter) {
  PerronBracket total{0.0, 0.0, true};
  for (const auto& members : strongly_connected_blocks(q)) {
    Matrix block(idx(members.size()), idx(members.size()));
    for (std::size_t a = 0; a < members.size(); ++a)
      for (std::size_t b = 0; b < members.size(); ++b)
        block(idx(a), idx(b)) = q(idx(members[a]), idx(members[b]));
    if (members.size() == 1 && block(0, 0) == 0.0) continue;
    const PerronBracket br = block_bracket(block, tol, max_iter);
    total.lower = std::max(total.lower, br.lower);
    total.upper = std::max(total.upper, br.upper);
    total.converged = total.converged && br.converged;
  }
  return total;
}

}  // namespace

// --- IndexSet --------------------------------------------------------------

IndexSet::IndexSet(std::size_t base_dim, std::vector<std::size_t> members)
    : base_dim_(base_dim), members_(std::move(members)) {
  if (base_dim_ == 0) throw IndexError("index set: base dimension must be positive");
  if (members_.empty()) throw IndexError("index set: must be nonempty");
  for (std::size_t k = 0; k < members_.size(); ++k) {
    if (members_[k] >= base_dim_) {
      std::ostringstream os;
      os << "index set: member " << members_[k] + 1 << " outside 1.." << base_dim_;
      throw IndexError(os.str());
    }
    if (k > 0 && members_[k] <= members_[k - 1])
      throw IndexError("index set: members must be strictly increasing");
  }
}

IndexSet IndexSet::full(std::size_t base_dim) {
  std::vector<std::size_t> m(base_dim);
  for (std::size_t i = 0; i < base_dim; ++i) m[i] = i;
  return IndexSet(base_dim, std::move(m));
}

IndexSet IndexSet::range(std::size_t base_dim, std::size_t first, std::size_t last) {
  if (first > last) throw IndexError("index set: empty range");
  std::vector<std::size_t> m;
  for (std::size_t i = first; i <= last; ++i) m.push_back(i);
  return IndexSet(base_dim, std::move(m));
}

bool IndexSet::contains(std::size_t index) const {
  return std::binary_search(members_.begin(), members_.end(), index);
}

std::optional<IndexSet> IndexSet::complement() const {
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < base_dim_; ++i)
    if (!contains(i)) rest.push_back(i);
  if (rest.empty()) return std::nullopt;
  return IndexSet(base_dim_, std::move(rest));
}

// --- validation ------------------------------------------------------------

std::string to_string(MatrixCondition condition) {
  switch (condition) {
    case MatrixCondition::none: return "none";
    case MatrixCondition::unit_diagonal: return "unit-diagonal";
    case MatrixCondition::off_diagonal_sign: return "off-diagonal-sign";
    case MatrixCondition::spectral_radius: return "spectral-radius";
  }
  return "unknown";
}

ValidationReport validate_reflection_m_matrix(const Matrix& m, const MatrixTolerances& tol) {
  require_square(m, "validate_reflection_m_matrix");
  require_finite(m, "validate_reflection_m_matrix");
  const Eigen::Index d = m.rows();
  ValidationReport report;
  report.spectral_radius = std::numeric_limits<double>::quiet_NaN();

  for (Eigen::Index i = 0; i < d; ++i) {
    if (std::abs(m(i, i) - 1.0) > tol.sign) {
      std::ostringstream os;
      os << "diagonal entry (" << i + 1 << "," << i + 1 << ") = " << m(i, i) << " is not 1";
      report.failed = MatrixCondition::unit_diagonal;
      report.reason = os.str();
      return report;
    }
  }
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i != j && m(i, j) > tol.sign) {
        std::ostringstream os;
        os << "positive off-diagonal entry (" << i + 1 << "," << j + 1 << ") = " << m(i, j);
        report.failed = MatrixCondition::off_diagonal_sign;
        report.reason = os.str();
        return report;
      }
    }

  Matrix q = (-m).cwiseMax(0.0);
  q.diagonal().setZero();
  const double limit = 1.0 - tol.radius_margin;
  const PerronBracket br = radius_bracket(q, 1e-12, 200000);
  report.spectral_radius = br.converged ? 0.5 * (br.lower + br.upper) : br.upper;
  // An unconverged bracket only counts when its upper end is already decisive.
  const bool below = br.converged ? report.spectral_radius < limit : br.upper < limit;
  if (!below) {
    std::ostringstream os;
    os << "spectral radius of Q = I - R is " << report.spectral_radius << ", not below " << limit;
    report.failed = MatrixCondition::spectral_radius;
    report.reason = os.str();
    return report;
  }
  report.accepted = true;
  return report;
}

double spectral_radius_nonneg(const Matrix& q, double tol, std::size_t max_iter) {
  require_square(q, "spectral_radius_nonneg");
  require_finite(q, "spectral_radius_nonneg");
  require_nonnegative(q, "spectral_radius_nonneg");
  if (!(tol > 0.0)) throw ParameterError("spectral_radius_nonneg: tol must be positive");
  // Diagonal entries are allowed here; they only shift a block's root.
  const PerronBracket br = radius_bracket(q, tol, max_iter);
  if (!br.converged)
    throw ConvergenceError("spectral_radius_nonneg: power iteration did not converge", br.lower,
                           br.upper);
  return 0.5 * (br.lower + br.upper);
}

// --- ReflectionMatrix ------------------------------------------------------

ReflectionMatrix::ReflectionMatrix(const Matrix& r, const MatrixTolerances& tol) {
  const ValidationReport report = validate_reflection_m_matrix(r, tol);
  if (!report.accepted) throw ValidationError("not a reflection nonsingular M-matrix: " + report.reason);
  r_ = r.cwiseMin(0.0);
  r_.diagonal().setOnes();
  radius_ = report.spectral_radius;
}

ReflectionMatrix ReflectionMatrix::identity(std::size_t dim) {
  return ReflectionMatrix(Matrix::Identity(idx(dim), idx(dim)));
}

Matrix ReflectionMatrix::q() const {
  Matrix q = -r_;
  q.diagonal().setZero();
  return q;
}

ReflectionMatrix ReflectionMatrix::principal(const IndexSet& j) const {
  return ReflectionMatrix(principal_submatrix(r_, j));
}

Matrix neumann_inverse(const ReflectionMatrix& r, double tol, std::size_t max_terms) {
  if (!(tol > 0.0)) throw ParameterError("neumann_inverse: tol must be positive");
  const Eigen::Index d = idx(r.dim());
  const Matrix q = r.q();
  Matrix sum = Matrix::Identity(d, d);
  Matrix term = Matrix::Identity(d, d);
  double previous = 1.0;
  for (std::size_t k = 1; k <= max_terms; ++k) {
    term = term * q;
    const double size = term.cwiseAbs().maxCoeff();
    sum += term;
    if (size < tol) return sum;
    previous = size;
  }
  throw ConvergenceError("neumann_inverse: series did not reach tolerance", previous,
                         term.cwiseAbs().maxCoeff());
}

// --- indexing --------------------------------------------------------------

Matrix principal_submatrix(const Matrix& m, const IndexSet& rows, const IndexSet& cols) {
  if (rows.base_dim() != static_cast<std::size_t>(m.rows()) ||
      cols.base_dim() != static_cast<std::size_t>(m.cols()))
    throw IndexError("principal_submatrix: index set base dimension does not match the matrix");
  Matrix out(idx(rows.size()), idx(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(idx(a), idx(b)) = m(idx(rows[a]), idx(cols[b]));
  return out;
}

Matrix principal_submatrix(const Matrix& m, const IndexSet& rows_and_cols) {
  return principal_submatrix(m, rows_and_cols, rows_and_cols);
}

Vector restrict(const Vector& v, const IndexSet& indices) {
  if (indices.base_dim() != static_cast<std::size_t>(v.size()))
    throw IndexError("restrict: index set base dimension does not match the vector");
  Vector out(idx(indices.size()));
  for (std::size_t a = 0; a < indices.size(); ++a) out(idx(a)) = v(idx(indices[a]));
  return out;
}

bool entrywise_leq(const Matrix& a, const Matrix& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("entrywise_leq: shape mismatch");
  return ((a - b).array() <= tol).all();
}

// --- lemma predicates ------------------------------------------------------

MatrixLemmaReport check_matrix_lemmas(const ReflectionMatrix& r, const ReflectionMatrix& rbar,
                                      const IndexSet& j, double tol) {
  if (r.dim() != rbar.dim()) throw PreconditionError("check_matrix_lemmas: R and Rbar differ in size");
  if (!entrywise_leq(r.matrix(), rbar.matrix()))
    throw PreconditionError("check_matrix_lemmas: R <= Rbar does not hold entrywise");
  if (j.base_dim() != r.dim()) throw IndexError("check_matrix_lemmas: index set dimension mismatch");

  MatrixLemmaReport report;
  report.tolerance = tol;
  const Matrix sub = principal_submatrix(r.matrix(), j);
  report.submatrix_valid = validate_reflection_m_matrix(sub).accepted;

  const Matrix inv = neumann_inverse(r);
  const Matrix inv_bar = neumann_inverse(rbar);
  if (report.submatrix_valid) {
    const Matrix sub_inv = neumann_inverse(ReflectionMatrix(sub));
    report.submatrix_inverse_negativity = (-sub_inv).maxCoeff();
    report.submatrix_inverse_excess = (sub_inv - principal_submatrix(inv, j)).maxCoeff();
  } else {
    report.submatrix_inverse_negativity = std::numeric_limits<double>::infinity();
    report.submatrix_inverse_excess = std::numeric_limits<double>::infinity();
  }
  report.inverse_order_violation = std::max((inv_bar - inv).maxCoeff(), (-inv_bar).maxCoeff());
  report.holds = report.submatrix_valid && report.submatrix_inverse_negativity <= tol &&
                 report.submatrix_inverse_excess <= tol && report.inverse_order_violation <= tol;
  return report;
}

double submatrix_product_violation(const Matrix& a, const Matrix& b, const IndexSet& i,
                                   const IndexSet& j, const IndexSet& k) {
  require_nonnegative(a, "submatrix_product_violation");
  require_nonnegative(b, "submatrix_product_violation");
  if (a.cols() != b.rows()) throw DimensionError("submatrix_product_violation: A and B not conformable");
  const Matrix lhs = principal_submatrix(a, i, j) * principal_submatrix(b, j, k);
  const Matrix rhs = principal_submatrix(Matrix(a * b), i, k);
  return (lhs - rhs).maxCoeff();
}

double product_order_violation(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  require_nonnegative(b, "product_order_violation");
  require_nonnegative(d, "product_order_violation");
  if (!entrywise_leq(b, a) || !entrywise_leq(d, c))
    throw PreconditionError("product_order_violation: requires A >= B and C >= D");
  if (a.cols() != c.rows()) throw DimensionError("product_order_violation: not conformable");
  const Matrix ac = a * c;
  const Matrix bd = b * d;
  return std::max((bd - ac).maxCoeff(), (-bd).maxCoeff());
}

double restricted_action_violation(const Matrix& a, const Vector& v, const IndexSet& j) {
  require_square(a, "restricted_action_violation");
  require_nonnegative(a, "restricted_action_violation");
  if ((v.array() < 0.0).any())
    throw PreconditionError("restricted_action_violation: vector must be nonnegative");
  if (a.cols() != v.size()) throw DimensionError("restricted_action_violation: not conformable");
  const Vector lhs = principal_submatrix(a, j) * restrict(v, j);
  const Vector rhs = restrict(Vector(a * v), j);
  return (lhs - rhs).maxCoeff();
}

}  // namespace obliq
