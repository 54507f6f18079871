#ifndef POPKOLMO_EIGENVALUES_HPP
#define POPKOLMO_EIGENVALUES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <cstddef>
#include <vector>

#include "popkolmo/error.hpp"
#include "popkolmo/matrix.hpp"

namespace popkolmo {

using Complex = std::complex<double>;

/// Orthogonal similarity reduction to upper Hessenberg form by Householder
/// reflections.
inline Matrix hessenberg(Matrix h) {
  if (!h.is_square()) throw Error(ErrorCode::NonSquare, "hessenberg");
  const std::size_t n = h.rows();
  if (n < 3) return h;
  std::vector<double> ort(n, 0.0);
  const std::size_t high = n - 1;
  for (std::size_t m = 1; m + 1 <= high; ++m) {
    double scale = 0.0;
    for (std::size_t i = m; i <= high; ++i) scale += std::abs(h(i, m - 1));
    if (scale == 0.0) continue;
    double hh = 0.0;
    for (std::size_t i = high + 1; i-- > m;) {
      ort[i] = h(i, m - 1) / scale;
      hh += ort[i] * ort[i];
    }
    double g = std::sqrt(hh);
    if (ort[m] > 0) g = -g;
    hh -= ort[m] * g;
    ort[m] -= g;
    for (std::size_t j = m; j < n; ++j) {
      double f = 0.0;
      for (std::size_t i = high + 1; i-- > m;) f += ort[i] * h(i, j);
      f /= hh;
      for (std::size_t i = m; i <= high; ++i) h(i, j) -= f * ort[i];
    }
    for (std::size_t i = 0; i <= high; ++i) {
      double f = 0.0;
      for (std::size_t j = high + 1; j-- > m;) f += ort[j] * h(i, j);
      f /= hh;
      for (std::size_t j = m; j <= high; ++j) h(i, j) -= f * ort[j];
    }
    h(m, m - 1) = scale * g;
    for (std::size_t i = m + 1; i <= high; ++i) h(i, m - 1) = 0.0;
  }
  return h;
}

namespace detail {

inline double copy_sign(double magnitude, double sign_of) {
  return sign_of >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude);
}

}  // namespace detail

/// Relative deflation threshold for subdiagonal entries.
inline constexpr double kDeflationTolerance = 1e-14;

/// All eigenvalues (with algebraic multiplicity) of a real square matrix:
/// Hessenberg reduction followed by Francis implicit double-shift QR.
/// Gives up with NoConvergence after 60 n sweeps in total.
inline std::vector<Complex> full_spectrum(const Matrix& input) {
  if (!input.is_square()) throw Error(ErrorCode::NonSquare, "full_spectrum");
  const int n = static_cast<int>(input.rows());
  if (n == 0) throw Error(ErrorCode::InvalidInput, "empty matrix");
  Matrix a = hessenberg(input);
  std::vector<Complex> w(static_cast<std::size_t>(n));
  auto at = [&a](int i, int j) -> double& {
    return a(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };

  double anorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = std::max(i - 1, 0); j < n; ++j) anorm += std::abs(at(i, j));

  const int max_sweeps = 60 * n;
  int sweeps = 0;
  int nn = n - 1;
  double shift_total = 0.0;
  double x = 0, y = 0, z = 0, p = 0, q = 0, r = 0, s = 0, wv = 0;
  while (nn >= 0) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l > 0; --l) {
        s = std::abs(at(l - 1, l - 1)) + std::abs(at(l, l));
        if (s == 0.0) s = anorm;
        if (std::abs(at(l, l - 1)) <= kDeflationTolerance * s) {
          at(l, l - 1) = 0.0;
          break;
        }
      }
      x = at(nn, nn);
      if (l == nn) {
        w[static_cast<std::size_t>(nn--)] = x + shift_total;
      } else {
        y = at(nn - 1, nn - 1);
        wv = at(nn, nn - 1) * at(nn - 1, nn);
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + wv;
          z = std::sqrt(std::abs(q));
          x += shift_total;
          auto k1 = static_cast<std::size_t>(nn - 1);
          auto k2 = static_cast<std::size_t>(nn);
          if (q >= 0.0) {
            z = p + detail::copy_sign(z, p);
            w[k1] = w[k2] = x + z;
            if (z != 0.0) w[k2] = x - wv / z;
          } else {
            w[k2] = Complex(x + p, -z);
            w[k1] = std::conj(w[k2]);
          }
          nn -= 2;
        } else {
          if (++sweeps > max_sweeps) {
            throw Error(ErrorCode::NoConvergence,
                        "QR iteration exceeded 60n sweeps");
          }
          if (its > 0 && its % 10 == 0) {
            // Exceptional shift.
            shift_total += x;
            for (int i = 0; i <= nn; ++i) at(i, i) -= x;
            s = std::abs(at(nn, nn - 1)) + std::abs(at(nn - 1, nn - 2));
            y = x = 0.75 * s;
            wv = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = at(m, m);
            r = x - z;
            s = y - z;
            p = (r * s - wv) / at(m + 1, m) + at(m, m + 1);
            q = at(m + 1, m + 1) - z - r - s;
            r = at(m + 2, m + 1);
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(at(m, m - 1)) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(at(m - 1, m - 1)) +
                                            std::abs(z) +
                                            std::abs(at(m + 1, m + 1)));
            if (u <= std::numeric_limits<double>::epsilon() * v) break;
          }
          for (int i = m; i < nn - 1; ++i) {
            at(i + 2, i) = 0.0;
            if (i != m) at(i + 2, i - 1) = 0.0;
          }
          for (int k = m; k < nn; ++k) {
            if (k != m) {
              p = at(k, k - 1);
              q = at(k + 1, k - 1);
              r = 0.0;
              if (k + 1 != nn) r = at(k + 2, k - 1);
              if ((x = std::abs(p) + std::abs(q) + std::abs(r)) != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            if ((s = detail::copy_sign(std::sqrt(p * p + q * q + r * r), p)) !=
                0.0) {
              if (k == m) {
                if (l != m) at(k, k - 1) = -at(k, k - 1);
              } else {
                at(k, k - 1) = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = at(k, j) + q * at(k + 1, j);
                if (k + 1 != nn) {
                  p += r * at(k + 2, j);
                  at(k + 2, j) -= p * z;
                }
                at(k + 1, j) -= p * y;
                at(k, j) -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * at(i, k) + y * at(i, k + 1);
                if (k + 1 != nn) {
                  p += z * at(i, k + 2);
                  at(i, k + 2) -= p * r;
                }
                at(i, k + 1) -= p * q;
                at(i, k) -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
  return w;
}

inline double spectral_bound_of(const std::vector<Complex>& spectrum) {
  double s = -std::numeric_limits<double>::infinity();
  for (const auto& l : spectrum) s = std::max(s, l.real());
  return s;
}

inline double spectral_radius_of(const std::vector<Complex>& spectrum) {
  double s = 0.0;
  for (const auto& l : spectrum) s = std::max(s, std::abs(l));
  return s;
}

}  // namespace popkolmo

#endif  // POPKOLMO_EIGENVALUES_HPP
