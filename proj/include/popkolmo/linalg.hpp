#ifndef POPKOLMO_LINALG_HPP
#define POPKOLMO_LINALG_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "popkolmo/error.hpp"
#include "popkolmo/matrix.hpp"

namespace popkolmo::linalg {

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws NoConvergence when a pivot vanishes exactly.
inline Vector solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (!a.is_square() || b.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve: shape mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) {
      throw Error(ErrorCode::NoConvergence, "solve: singular matrix", k);
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  Vector x(n);
  for (std::size_t k = n; k-- > 0;) {
    double s = b[k];
    for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

/// Solves A X = B for a matrix right-hand side (partial pivoting).
inline Matrix solve(Matrix a, Matrix b) {
  const std::size_t n = a.rows();
  const std::size_t m = b.cols();
  if (!a.is_square() || b.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve: shape mismatch");
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0.0) {
      throw Error(ErrorCode::NoConvergence, "solve: singular matrix", k);
    }
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      for (std::size_t j = 0; j < m; ++j) std::swap(b(k, j), b(piv, j));
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      for (std::size_t j = 0; j < m; ++j) b(i, j) -= f * b(k, j);
    }
  }
  Matrix x(n, m);
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t c = 0; c < m; ++c) {
      double s = b(k, c);
      for (std::size_t j = k + 1; j < n; ++j) s -= a(k, j) * x(j, c);
      x(k, c) = s / a(k, k);
    }
  }
  return x;
}

/// Numerical rank by Gaussian elimination with complete (row and column)
/// pivoting. Pivots below `rel_tol * max|a_ij|` count as zero.
inline std::size_t elimination_rank(Matrix a, double rel_tol = 1e-9) {
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  const double cutoff = rel_tol * std::max(1.0, a.max_abs());
  std::size_t rank = 0;
  for (std::size_t k = 0; k < std::min(rows, cols); ++k) {
    std::size_t pr = k, pc = k;
    double best = 0.0;
    for (std::size_t i = k; i < rows; ++i)
      for (std::size_t j = k; j < cols; ++j)
        if (std::abs(a(i, j)) > best) {
          best = std::abs(a(i, j));
          pr = i;
          pc = j;
        }
    if (best <= cutoff) break;
    for (std::size_t j = 0; j < cols; ++j) std::swap(a(k, j), a(pr, j));
    for (std::size_t i = 0; i < rows; ++i) std::swap(a(i, k), a(i, pc));
    for (std::size_t i = k + 1; i < rows; ++i) {
      const double f = a(i, k) / a(k, k);
      for (std::size_t j = k; j < cols; ++j) a(i, j) -= f * a(k, j);
    }
    ++rank;
  }
  return rank;
}

/// Kernel vector of an irreducible Kolmogorov matrix (columns summing to
/// zero), normalized to unit sum. Uses the subtraction-free
/// Grassmann-Taksar-Heyman elimination, so every entry comes out strictly
/// positive. Only off-diagonal entries are read.
inline Vector kolmogorov_kernel(const Matrix& c) {
  const std::size_t n = c.rows();
  if (!c.is_square() || n == 0) {
    throw Error(ErrorCode::NonSquare, "kernel of a non-square matrix");
  }
  // q(i, j) = rate i -> j, i.e. the generator in row-sum convention.
  Matrix q = c.transposed();
  for (std::size_t k = n; k-- > 1;) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += q(k, j);
    if (!(s > 0.0)) {
      throw Error(ErrorCode::NoConvergence,
                  "kernel elimination hit a state with no path back; "
                  "matrix is not irreducible",
                  k);
    }
    for (std::size_t i = 0; i < k; ++i) q(i, k) /= s;
    for (std::size_t i = 0; i < k; ++i) {
      const double qik = q(i, k);
      if (qik == 0.0) continue;
      for (std::size_t j = 0; j < k; ++j) {
        if (i != j) q(i, j) += qik * q(k, j);
      }
    }
  }
  Vector pi(n, 0.0);
  pi[0] = 1.0;
  for (std::size_t j = 1; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < j; ++i) s += pi[i] * q(i, j);
    pi[j] = s;
  }
  const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= total;
  return pi;
}

}  // namespace popkolmo::linalg

#endif  // POPKOLMO_LINALG_HPP
