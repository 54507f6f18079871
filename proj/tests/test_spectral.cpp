#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "popkolmo/spectral.hpp"

using namespace popkolmo;

namespace {

TransitionMatrix chain_example() {
  Matrix r(4, 4, 0.0);
  r(0, 1) = 2.0;
  r(1, 0) = 1.0;
  r(0, 2) = 1.0;
  r(2, 3) = 0.5;
  return from_offdiagonal_rates(r);
}

TransitionMatrix two_cycles() {
  Matrix r(4, 4, 0.0);
  r(0, 1) = 2.0;  // 2 -> 1
  r(1, 0) = 1.0;  // 1 -> 2
  r(3, 2) = 3.0;  // 3 -> 4
  r(2, 3) = 1.0;  // 4 -> 3
  return from_offdiagonal_rates(r);
}

void expect_vec_near(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << i;
}

double residual(const Matrix& c, const Vector& v, double lambda = 0.0) {
  const Vector cv = c * v;
  double r = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    r = std::max(r, std::abs(cv[i] - lambda * v[i]));
  return r;
}

}  // namespace

TEST(FullSpectrum, TwoStateSymmetric) {
  const auto s = full_spectrum(Matrix{{-1, 1}, {1, -1}});
  EXPECT_LT(oracle::optimal_matching_distance(s, {0.0, -2.0}), 1e-14);
}

TEST(FullSpectrum, ThreeCycleCirculant) {
  const auto s = full_spectrum(Matrix{{-1, 0, 1}, {1, -1, 0}, {0, 1, -1}});
  const double h = std::sqrt(3.0) / 2.0;
  EXPECT_LT(oracle::optimal_matching_distance(
                s, {Complex(0, 0), Complex(-1.5, h), Complex(-1.5, -h)}),
            1e-12);
}

TEST(FullSpectrum, Triangular) {
  const auto s = full_spectrum(Matrix{{0, 1}, {0, -1}});
  EXPECT_LT(oracle::optimal_matching_distance(s, {0.0, -1.0}), 1e-15);
}

TEST(FullSpectrum, AgreesWithCharacteristicPolynomialRoots) {
  std::mt19937_64 rng(314);
  std::uniform_int_distribution<int> entry(-5, 5), size(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = static_cast<std::size_t>(size(rng));
    Matrix a(n, n);
    for (auto& v : a.values()) v = entry(rng);
    const auto got = full_spectrum(a);
    const auto want = oracle::durand_kerner(oracle::charpoly_faddeev_leverrier(a));
    EXPECT_LT(oracle::optimal_matching_distance(got, want), 1e-6) << "trial " << trial;
  }
}

TEST(FullSpectrum, LargerKolmogorovWithinTolerance) {
  // n = 12 block of known spectrum: direct sum of 2-state chains with
  // eigenvalues {0, -(a+b)}.
  Matrix c(12, 12, 0.0);
  std::vector<Complex> want;
  for (std::size_t b = 0; b < 6; ++b) {
    const double up = 0.5 + static_cast<double>(b), down = 1.0;
    c(2 * b, 2 * b) = -up;
    c(2 * b + 1, 2 * b) = up;
    c(2 * b, 2 * b + 1) = down;
    c(2 * b + 1, 2 * b + 1) = -down;
    want.emplace_back(0.0);
    want.emplace_back(-(up + down));
  }
  // Mix with an orthogonal similarity (Givens rotations) so QR has work to do.
  Matrix q = Matrix::identity(12);
  for (std::size_t k = 0; k + 1 < 12; ++k) {
    Matrix g = Matrix::identity(12);
    const double th = 0.3 + 0.1 * static_cast<double>(k);
    g(k, k) = std::cos(th);
    g(k, k + 1) = -std::sin(th);
    g(k + 1, k) = std::sin(th);
    g(k + 1, k + 1) = std::cos(th);
    q = q * g;
  }
  const Matrix mixed = q * c * q.transposed();
  // All eigenvalues are real, so sorting by real part gives the optimal pairing.
  auto by_real = [](Complex a, Complex b) { return a.real() < b.real(); };
  auto got = full_spectrum(mixed);
  ASSERT_EQ(got.size(), want.size());
  std::sort(got.begin(), got.end(), by_real);
  std::sort(want.begin(), want.end(), by_real);
  for (std::size_t i = 0; i < got.size(); ++i)
    EXPECT_LT(std::abs(got[i] - want[i]), 1e-7 * std::max(1.0, mixed.max_abs()));
}

TEST(SpectralBoundWitness, Examples) {
  const auto w = spectral_bound_with_witness(validate_kolmogorov(Matrix{{-1, 2}, {1, -2}}));
  EXPECT_NEAR(w.bound, 0.0, 1e-12);
  expect_vec_near(w.vector, {2.0 / 3.0, 1.0 / 3.0}, 1e-12);

  const auto v = spectral_bound_with_witness(validate_kolmogorov(Matrix{{0, 1}, {0, -1}}));
  EXPECT_NEAR(v.bound, 0.0, 1e-12);
  expect_vec_near(v.vector, {1.0, 0.0}, 1e-12);
}

TEST(SpectralBoundWitness, RandomIrreducibleAgainstEliminationKernel) {
  std::mt19937_64 rng(55);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = from_offdiagonal_rates(oracle::random_irreducible_rates(5, rng));
    const auto w = spectral_bound_with_witness(c);
    EXPECT_NEAR(w.bound, 0.0, 1e-9);
    expect_vec_near(w.vector, oracle::kernel_by_elimination(c.entries()), 1e-8);
    EXPECT_LT(residual(c.entries(), w.vector, w.bound), 1e-9 * matrix_scale(c.entries()));
    for (double x : w.vector) EXPECT_GE(x, 0.0);
  }
}

TEST(SpectralBoundWitness, ReducibleWitnessIsNonNegativeKernelVector) {
  std::mt19937_64 rng(56);
  for (int trial = 0; trial < 40; ++trial) {
    const auto c = from_offdiagonal_rates(oracle::random_reducible(rng).rates);
    const auto w = spectral_bound_with_witness(c);
    EXPECT_NEAR(w.bound, 0.0, 1e-9);
    EXPECT_LT(residual(c.entries(), w.vector, w.bound), 1e-9 * matrix_scale(c.entries()));
    for (double x : w.vector) EXPECT_GE(x, 0.0);
  }
}

TEST(RightPerronBasis, Examples) {
  const auto a = validate_kolmogorov(Matrix{{0, 1}, {0, -1}});
  const auto basis_a = right_perron_basis(a, normal_form(a));
  ASSERT_EQ(basis_a.size(), 1u);
  expect_vec_near(basis_a[0], {1.0, 0.0}, 0.0);

  const auto b = two_cycles();
  const auto basis_b = right_perron_basis(b, normal_form(b));
  ASSERT_EQ(basis_b.size(), 2u);
  expect_vec_near(basis_b[0], {2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0}, 1e-15);
  expect_vec_near(basis_b[1], {0.0, 0.0, 0.25, 0.75}, 1e-15);
}

TEST(RightPerronBasis, ChainMatchesEliminationOracle) {
  const auto c = chain_example();
  const auto basis = right_perron_basis(c, normal_form(c));
  ASSERT_EQ(basis.size(), 1u);
  // Oracle: the kernel restricted to {1,2} by elimination, zeros elsewhere.
  const std::vector<std::size_t> idx{0, 1};
  const Vector local = oracle::kernel_by_elimination(c.entries().submatrix(idx, idx));
  expect_vec_near(basis[0], {local[0], local[1], 0.0, 0.0}, 1e-12);
  EXPECT_EQ(basis[0][2], 0.0);
  EXPECT_EQ(basis[0][3], 0.0);
  EXPECT_LT(residual(c.entries(), basis[0]), 1e-9);
}

TEST(VerifyZeroPattern, Examples) {
  using K = BlockKind;
  EXPECT_TRUE(verify_zero_pattern({{1.0, 0.0}}, {K::Closed, K::Transient}));
  EXPECT_FALSE(verify_zero_pattern({{0.5, 0.5}}, {K::Closed, K::Transient}));
  const auto b = two_cycles();
  const auto nf = normal_form(b);
  EXPECT_TRUE(verify_zero_pattern(right_perron_basis(b, nf), classify_states(nf)));
  // A closed patch left uncovered fails.
  EXPECT_FALSE(verify_zero_pattern({{1.0, 0.0}}, {K::Closed, K::Closed}));
}

TEST(Analyze, Examples) {
  const auto r = analyze(validate_kolmogorov(Matrix{{-1, 2}, {1, -2}}));
  EXPECT_LT(oracle::optimal_matching_distance(r.spectrum, {0.0, -3.0}), 1e-14);
  EXPECT_EQ(r.spectral_bound, 0.0);
  EXPECT_TRUE(r.dominant_is_simple);
  expect_vec_near(r.default_perron, {2.0 / 3.0, 1.0 / 3.0}, 1e-15);

  const auto z = analyze(validate_kolmogorov(Matrix{{0.0}}));
  ASSERT_EQ(z.spectrum.size(), 1u);
  EXPECT_EQ(z.spectrum[0], Complex(0.0));
  expect_vec_near(z.default_perron, {1.0}, 0.0);

  const auto t = analyze(two_cycles());
  EXPECT_EQ(t.zero_multiplicity_geometric, 2u);
  EXPECT_EQ(t.kernel_dimension_by_rank, 2u);
  EXPECT_FALSE(t.dominant_is_simple);
  EXPECT_EQ(t.zero_eigenvalue_count, 2u);
}

TEST(AnalyzeProperty, IrreducibleTheorems) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = from_offdiagonal_rates(
        oracle::random_irreducible_rates(2 + trial % 7, rng));
    const auto nf = normal_form(c);
    const auto r = analyze(c, nf);
    const double scale = matrix_scale(c.entries());
    EXPECT_EQ(r.spectral_bound, 0.0);
    std::size_t near_zero = 0;
    for (const auto& l : r.spectrum) {
      if (l.real() >= -1e-8 * scale) ++near_zero;
    }
    EXPECT_EQ(near_zero, 1u);
    for (double x : r.default_perron) EXPECT_GT(x, 0.0);
    EXPECT_LT(r.left_perron_residual, 1e-12);
    EXPECT_TRUE(check_theorems(c, nf, r).all());
  }
}

TEST(AnalyzeProperty, ReducibleTheoremsAndPositivityDichotomy) {
  std::mt19937_64 rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = from_offdiagonal_rates(oracle::random_reducible(rng).rates);
    const auto nf = normal_form(c);
    const auto r = analyze(c, nf);
    EXPECT_EQ(r.spectral_bound, 0.0);
    EXPECT_EQ(c.n() - linalg::elimination_rank(c.entries()), nf.m);
    EXPECT_TRUE(check_theorems(c, nf, r).all());
    if (nf.transient_count() > 0) {
      for (const auto& v : r.right_perron_basis) {
        EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
      }
      EXPECT_TRUE(std::any_of(r.default_perron.begin(), r.default_perron.end(),
                              [](double x) { return x == 0.0; }));
    } else {
      for (double x : r.default_perron) EXPECT_GT(x, 0.0);
    }
  }
}

TEST(Linalg, KolmogorovKernelIsPositiveAndMatchesElimination) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = from_offdiagonal_rates(oracle::random_irreducible_rates(6, rng, 0.1));
    const auto k = linalg::kolmogorov_kernel(c.entries());
    for (double x : k) EXPECT_GT(x, 0.0);
    expect_vec_near(k, oracle::kernel_by_elimination(c.entries()), 1e-10);
  }
}

TEST(Linalg, EliminationRank) {
  EXPECT_EQ(linalg::elimination_rank(Matrix{{1, 2}, {2, 4}}), 1u);
  EXPECT_EQ(linalg::elimination_rank(Matrix::identity(4)), 4u);
  EXPECT_EQ(linalg::elimination_rank(Matrix(3, 3, 0.0)), 0u);
}
