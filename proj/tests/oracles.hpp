#pragma once

// Reference computations written independently of the library, used to
// derive the values the unit tests compare against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline Matrix inverse(const Matrix& m) { return m.fullPivLu().inverse(); }

// Largest eigenvalue modulus from a general eigensolver.
inline double perron_root(const Matrix& q) {
  if (q.rows() == 0) return 0.0;
  const Eigen::EigenSolver<Matrix> es(q, false);
  double best = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) best = std::max(best, std::abs(es.eigenvalues()(k)));
  return best;
}

inline Matrix sub(const Matrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = m(rows[a], cols[b]);
  return out;
}

// One-dimensional reflection at zero: L(t) = max_{s <= t} (-x(s))^+.
inline std::vector<double> scalar_reflection(const std::vector<double>& x) {
  std::vector<double> l(x.size());
  double run = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    run = std::max(run, -x[k]);
    l[k] = run;
  }
  return l;
}

// Plain Picard iteration of the Harrison-Reiman map on a grid; x is d x (M+1).
// Returns L; Z follows as x + R L.
inline Matrix picard_reflection(const Matrix& r, const Matrix& x, double tol = 1e-13, int max_iter = 200000) {
  const Eigen::Index d = x.rows();
  const Eigen::Index m = x.cols();
  const Matrix q = Matrix::Identity(d, d) - r;
  Matrix l = Matrix::Zero(d, m);
  for (int it = 0; it < max_iter; ++it) {
    Matrix next(d, m);
    for (Eigen::Index i = 0; i < d; ++i) {
      double run = 0.0;
      for (Eigen::Index k = 0; k < m; ++k) {
        double v = -x(i, k);
        for (Eigen::Index j = 0; j < d; ++j)
          if (j != i) v += q(i, j) * l(j, k);
        run = std::max(run, v);
        next(i, k) = run;
      }
    }
    const double change = (next - l).cwiseAbs().maxCoeff();
    l = next;
    if (change < tol) break;
  }
  return l;
}

inline std::vector<double> linspace(double t, int steps) {
  std::vector<double> ts(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) ts[static_cast<std::size_t>(k)] = t * k / steps;
  return ts;
}

}  // namespace oracle
