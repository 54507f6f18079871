#ifndef POPKOLMO_SPECTRAL_HPP
#define POPKOLMO_SPECTRAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "popkolmo/eigenvalues.hpp"
#include "popkolmo/error.hpp"
#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/linalg.hpp"
#include "popkolmo/matrix.hpp"
#include "popkolmo/structure.hpp"

namespace popkolmo {

inline constexpr std::size_t kPowerIterationCap = 10000;
inline constexpr double kPowerIterationTolerance = 1e-13;
/// Eigenvalue treated as zero below this times max(1, ||C||_max).
inline constexpr double kZeroEigenvalueTolerance = 1e-8;
/// Sum-normalized Perron component treated as zero below this.
inline constexpr double kZeroComponentThreshold = 1e-9;

inline double matrix_scale(const Matrix& c) { return std::max(1.0, c.max_abs()); }

struct BoundWitness {
  double bound = 0.0;
  Vector vector;
  std::size_t iterations = 0;
  bool power_iteration_converged = false;
};

/// Spectral bound s(C) and a non-negative eigenvector for it.
///
/// Power iteration on the non-negative shift A = C + cI, c = max|c_ii| + 1,
/// whose spectral radius is s(C) + c. The iterate is then polished by one
/// inverse-iteration step on C shifted just to the right of the estimate;
/// (sigma I - C)^{-1} is entrywise non-negative there, so the witness stays
/// non-negative.
inline BoundWitness spectral_bound_with_witness(const TransitionMatrix& c) {
  const std::size_t n = c.n();
  const Matrix& cm = c.entries();
  double shift = 0.0;
  for (std::size_t i = 0; i < n; ++i) shift = std::max(shift, std::abs(cm(i, i)));
  shift += 1.0;
  Matrix a = cm;
  for (std::size_t i = 0; i < n; ++i) a(i, i) += shift;

  BoundWitness out;
  Vector v(n, 1.0 / static_cast<double>(n));
  for (; out.iterations < kPowerIterationCap; ++out.iterations) {
    Vector next = a * v;
    const double total = std::accumulate(next.begin(), next.end(), 0.0);
    for (double& x : next) x /= total;
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - v[i]));
    v = std::move(next);
    if (diff < kPowerIterationTolerance) {
      out.power_iteration_converged = true;
      ++out.iterations;
      break;
    }
  }

  auto rayleigh = [&](const Vector& x) {
    const Vector cx = cm * x;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += x[i] * cx[i];
      den += x[i] * x[i];
    }
    return num / den;
  };

  const double scale = matrix_scale(cm);
  double estimate = rayleigh(v);
  {
    Matrix shifted = cm * -1.0;
    const double sigma = estimate + 1e-10 * scale;
    for (std::size_t i = 0; i < n; ++i) shifted(i, i) += sigma;
    try {
      Vector refined = linalg::solve(shifted, v);
      const double total = std::accumulate(refined.begin(), refined.end(), 0.0);
      if (std::isfinite(total) && total > 0.0) {
        for (double& x : refined) x = std::max(0.0, x / total);
        const double t2 = std::accumulate(refined.begin(), refined.end(), 0.0);
        for (double& x : refined) x /= t2;
        v = std::move(refined);
        estimate = rayleigh(v);
      }
    } catch (const Error&) {
      // Shift landed exactly on an eigenvalue: keep the power iterate.
    }
  }

  const Vector cv = cm * v;
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    residual = std::max(residual, std::abs(cv[i] - estimate * v[i]));
  if (!out.power_iteration_converged && residual >= 1e-9 * scale) {
    throw Error(ErrorCode::NoConvergence,
                "power iteration reached its cap without a usable witness",
                out.iterations);
  }
  out.bound = estimate;
  out.vector = std::move(v);
  return out;
}

/// One kernel vector per closed block, supported exactly on that block,
/// strictly positive there and summing to one.
inline std::vector<Vector> right_perron_basis(const TransitionMatrix& c,
                                              const NormalForm& nf) {
  std::vector<Vector> basis;
  basis.reserve(nf.m);
  for (const auto& block : nf.blocks) {
    if (block.kind != BlockKind::Closed) continue;
    const auto& idx = block.original_indices;
    const Matrix sub = c.entries().submatrix(idx, idx);
    const Vector local = linalg::kolmogorov_kernel(sub);
    Vector v(c.n(), 0.0);
    for (std::size_t a = 0; a < idx.size(); ++a) v[idx[a]] = local[a];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Positive on closed patches, zero on transient ones: every vector has
/// support only on closed patches (and at least one), each closed patch is
/// covered by some vector, and every transient entry is below the
/// zero threshold.
inline bool verify_zero_pattern(const std::vector<Vector>& basis,
                                const std::vector<BlockKind>& labels,
                                double threshold = kZeroComponentThreshold) {
  const std::size_t n = labels.size();
  std::vector<bool> covered(n, false);
  for (const auto& v : basis) {
    if (v.size() != n) return false;
    bool any = false;
    for (std::size_t i = 0; i < n; ++i) {
      const bool positive = v[i] > threshold;
      if (labels[i] == BlockKind::Transient) {
        if (v[i] >= threshold) return false;
      } else if (positive) {
        any = true;
        covered[i] = true;
      }
    }
    if (!any) return false;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (labels[i] == BlockKind::Closed && !covered[i]) return false;
  return true;
}

struct SpectralReport {
  std::vector<Complex> spectrum;
  double spectral_bound = 0.0;
  double spectral_radius = 0.0;
  std::vector<Vector> right_perron_basis;
  Vector default_perron;
  double left_perron_residual = 0.0;
  std::size_t zero_multiplicity_geometric = 0;
  /// n - rank(C) by complete-pivoting elimination; should equal the above.
  std::size_t kernel_dimension_by_rank = 0;
  /// Eigenvalues within the zero tolerance (algebraic count, numerically).
  std::size_t zero_eigenvalue_count = 0;
  bool dominant_is_simple = false;
};

inline SpectralReport analyze(const TransitionMatrix& c, const NormalForm& nf) {
  const Matrix& cm = c.entries();
  const std::size_t n = c.n();
  const double scale = matrix_scale(cm);
  const double zero_tol = kZeroEigenvalueTolerance * scale;

  SpectralReport r;
  r.spectrum = full_spectrum(cm);
  r.spectral_bound = spectral_bound_of(r.spectrum);
  if (std::abs(r.spectral_bound) < zero_tol) r.spectral_bound = 0.0;
  r.spectral_radius = spectral_radius_of(r.spectrum);
  for (const auto& l : r.spectrum)
    if (std::abs(l) < zero_tol) ++r.zero_eigenvalue_count;

  r.right_perron_basis = right_perron_basis(c, nf);
  r.default_perron.assign(n, 0.0);
  for (const auto& v : r.right_perron_basis)
    for (std::size_t i = 0; i < n; ++i) r.default_perron[i] += v[i];
  const double total =
      std::accumulate(r.default_perron.begin(), r.default_perron.end(), 0.0);
  for (double& x : r.default_perron) x /= total;

  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += cm(i, j);
    r.left_perron_residual = std::max(r.left_perron_residual, std::abs(s));
  }
  r.zero_multiplicity_geometric = nf.m;
  r.kernel_dimension_by_rank = n - linalg::elimination_rank(cm);
  r.dominant_is_simple = nf.m == 1;
  return r;
}

inline SpectralReport analyze(const TransitionMatrix& c) {
  return analyze(c, normal_form(c));
}

/// Named numerical checks of the structural results; all should hold for
/// every valid Kolmogorov matrix.
struct TheoremChecks {
  bool zero_is_dominant = false;
  bool left_one_residual_ok = false;
  bool zero_pattern_consistent = false;
  bool transient_blocks_negative_bound = false;
  bool kernel_dimension_matches_rank = false;

  bool all() const noexcept {
    return zero_is_dominant && left_one_residual_ok && zero_pattern_consistent &&
           transient_blocks_negative_bound && kernel_dimension_matches_rank;
  }
};

inline TheoremChecks check_theorems(const TransitionMatrix& c,
                                    const NormalForm& nf,
                                    const SpectralReport& r) {
  const double scale = matrix_scale(c.entries());
  const double zero_tol = kZeroEigenvalueTolerance * scale;
  TheoremChecks t;

  // 0 is an eigenvalue, and every other eigenvalue lies strictly left of it.
  bool has_zero = false, dominant = true;
  for (const auto& l : r.spectrum) {
    if (std::abs(l) < zero_tol) {
      has_zero = true;
    } else if (l.real() > -zero_tol) {
      dominant = false;
    }
  }
  t.zero_is_dominant = has_zero && dominant && r.spectral_bound == 0.0;
  t.left_one_residual_ok = r.left_perron_residual < 1e-12 * scale;
  t.zero_pattern_consistent =
      verify_zero_pattern(r.right_perron_basis, classify_states(nf));

  t.transient_blocks_negative_bound = true;
  for (const auto& b : nf.blocks) {
    if (b.kind != BlockKind::Transient) continue;
    const Matrix sub = c.entries().submatrix(b.original_indices, b.original_indices);
    if (!(spectral_bound_of(full_spectrum(sub)) < 0.0)) {
      t.transient_blocks_negative_bound = false;
    }
  }
  t.kernel_dimension_matches_rank =
      r.kernel_dimension_by_rank == r.zero_multiplicity_geometric;
  return t;
}

}  // namespace popkolmo

#endif  // POPKOLMO_SPECTRAL_HPP
