#ifndef POPKOLMO_KOLMOGOROV_HPP
#define POPKOLMO_KOLMOGOROV_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>

#include "popkolmo/error.hpp"
#include "popkolmo/linalg.hpp"
#include "popkolmo/matrix.hpp"

namespace popkolmo {

inline constexpr double kDefaultTolerance = 1e-12;

/// Validated Kolmogorov (transition) matrix. Entry (i, j) is the rate of
/// transition from patch j to patch i; off-diagonal entries are
/// non-negative and every column sums to zero.
///
/// Diagonal convention: c_jj = -sum_{i != j} c_ij, i.e. the diagonal is the
/// negated outflow of the same column. (The source model writes the sum
/// over the wrong index; the column-sum reading is the one the spectral
/// results depend on.)
class TransitionMatrix {
 public:
  std::size_t n() const noexcept { return entries_.rows(); }
  const Matrix& entries() const noexcept { return entries_; }
  double tolerance() const noexcept { return tolerance_; }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(i, j);
  }

  friend TransitionMatrix validate_kolmogorov(Matrix, double);
  friend TransitionMatrix from_offdiagonal_rates(const Matrix&);

 private:
  TransitionMatrix(Matrix entries, double tolerance)
      : entries_(std::move(entries)), tolerance_(tolerance) {}

  Matrix entries_;
  double tolerance_ = kDefaultTolerance;
};

/// Checks the Kolmogorov conditions and returns the validated matrix.
/// Off-diagonal entries in (-tolerance, 0) are clamped to zero. Column sums
/// are compared against tolerance * max(1, max|c_ij|).
inline TransitionMatrix validate_kolmogorov(Matrix entries,
                                            double tolerance = kDefaultTolerance) {
  if (!entries.is_square()) {
    throw Error(ErrorCode::NonSquare,
                "matrix is " + std::to_string(entries.rows()) + "x" +
                    std::to_string(entries.cols()));
  }
  if (entries.rows() == 0) {
    throw Error(ErrorCode::InvalidInput, "matrix must have n >= 1");
  }
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::InvalidInput, "tolerance must be non-negative");
  }
  const std::size_t n = entries.rows();
  for (double v : entries.values()) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::InvalidInput, "matrix has a non-finite entry");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      double& v = entries(i, j);
      if (v < -tolerance) {
        throw Error(ErrorCode::NegativeOffDiagonal,
                    "entry (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") is negative",
                    j);
      }
      if (v < 0.0) v = 0.0;
    }
  }
  const double bound = tolerance * std::max(1.0, entries.max_abs());
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += entries(i, j);
    if (std::abs(s) > bound) {
      throw Error(ErrorCode::ColumnSumNonZero,
                  "column " + std::to_string(j + 1) + " sums to " +
                      std::to_string(s),
                  j);
    }
  }
  return TransitionMatrix(std::move(entries), tolerance);
}

/// Builds a Kolmogorov matrix from off-diagonal rates; the diagonal of the
/// input is ignored and replaced by the negated column outflow, summed in
/// increasing row order, so every column sums to exactly zero.
inline TransitionMatrix from_offdiagonal_rates(const Matrix& rates) {
  if (!rates.is_square()) {
    throw Error(ErrorCode::NonSquare, "rate matrix is not square");
  }
  if (rates.rows() == 0) {
    throw Error(ErrorCode::InvalidInput, "matrix must have n >= 1");
  }
  const std::size_t n = rates.rows();
  Matrix c(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double outflow = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j) continue;
      const double r = rates(i, j);
      if (!std::isfinite(r)) {
        throw Error(ErrorCode::InvalidInput, "rate is not finite");
      }
      if (r < 0.0) {
        throw Error(ErrorCode::NegativeOffDiagonal,
                    "rate (" + std::to_string(i + 1) + "," +
                        std::to_string(j + 1) + ") is negative",
                    j);
      }
      c(i, j) = r;
      outflow += r;
    }
    c(j, j) = -outflow;
  }
  return TransitionMatrix(std::move(c), kDefaultTolerance);
}

namespace detail {

// Degree-13 diagonal Pade coefficients for exp.
inline constexpr std::array<double, 14> kPade13 = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

inline constexpr int kMaxSquarings = 64;

}  // namespace detail

/// exp(t A) by scaling and squaring with a degree-13 Pade approximant.
/// The scaling depth s is the smallest with ||tA||_1 / 2^s <= 0.5; more than
/// 64 squarings (or a non-finite norm) is reported as Overflow.
inline Matrix matrix_exponential(const Matrix& a, double t) {
  if (!a.is_square()) throw Error(ErrorCode::NonSquare, "exp of non-square");
  const std::size_t n = a.rows();
  if (t == 0.0 || n == 0) return Matrix::identity(n);

  Matrix x = a * t;
  const double norm = x.norm1();
  if (!std::isfinite(norm)) {
    throw Error(ErrorCode::Overflow, "t*||A|| is not finite");
  }
  int squarings = 0;
  if (norm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
    if (std::ldexp(norm, -squarings) > 0.5) ++squarings;
  }
  if (squarings > detail::kMaxSquarings) {
    throw Error(ErrorCode::Overflow,
                "t*||A||_1 too large for the scaling depth");
  }
  x *= std::ldexp(1.0, -squarings);

  const auto& b = detail::kPade13;
  const Matrix id = Matrix::identity(n);
  const Matrix x2 = x * x;
  const Matrix x4 = x2 * x2;
  const Matrix x6 = x4 * x2;

  Matrix u_inner = x6 * (b[13] * x6 + b[11] * x4 + b[9] * x2) + b[7] * x6 +
                   b[5] * x4 + b[3] * x2 + b[1] * id;
  const Matrix u = x * u_inner;
  const Matrix v = x6 * (b[12] * x6 + b[10] * x4 + b[8] * x2) + b[6] * x6 +
                   b[4] * x4 + b[2] * x2 + b[0] * id;

  Matrix r = linalg::solve(v - u, v + u);
  for (int k = 0; k < squarings; ++k) r = r * r;
  for (double e : r.values()) {
    if (!std::isfinite(e)) {
      throw Error(ErrorCode::Overflow, "matrix exponential overflowed");
    }
  }
  return r;
}

/// exp(tC) for a Kolmogorov matrix: a column-stochastic propagator.
struct MatrixExponentialResult {
  Matrix entries;
  double t = 0.0;
  /// Smallest entry before roundoff negatives were clamped to zero.
  double min_entry_before_clamp = 0.0;
};

inline constexpr double kNegativeFloor = -1e-12;

/// Propagator exp(tC) for t >= 0. Entries in [-1e-12, 0) are clamped to
/// zero; anything more negative is an algorithm failure (NoConvergence).
inline MatrixExponentialResult matrix_exponential(const TransitionMatrix& c,
                                                  double t) {
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::InvalidInput,
                "propagator time must be non-negative");
  }
  MatrixExponentialResult out;
  out.t = t;
  out.entries = matrix_exponential(c.entries(), t);
  double lowest = 0.0;
  for (double& e : out.entries.values()) {
    lowest = std::min(lowest, e);
    if (e < 0.0) {
      if (e < kNegativeFloor) {
        throw Error(ErrorCode::NoConvergence,
                    "propagator entry " + std::to_string(e) +
                        " below the roundoff floor");
      }
      e = 0.0;
    }
  }
  out.min_entry_before_clamp = lowest;
  return out;
}

}  // namespace popkolmo

#endif  // POPKOLMO_KOLMOGOROV_HPP
