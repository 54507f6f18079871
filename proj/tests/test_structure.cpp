#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "popkolmo/spectral.hpp"
#include "popkolmo/structure.hpp"

using namespace popkolmo;

namespace {

using Idx = std::vector<std::size_t>;

// 4 patches: {1,2} exchange with each other, 3 drains into 1, 4 drains into 3.
TransitionMatrix chain_example() {
  Matrix r(4, 4, 0.0);
  r(0, 1) = 2.0;  // 2 -> 1
  r(1, 0) = 1.0;  // 1 -> 2
  r(0, 2) = 1.0;  // 3 -> 1
  r(2, 3) = 0.5;  // 4 -> 3
  return from_offdiagonal_rates(r);
}

TransitionMatrix two_cycles() {
  Matrix r(4, 4, 0.0);
  r(0, 1) = 2.0;
  r(1, 0) = 1.0;
  r(2, 3) = 3.0;
  r(3, 2) = 1.0;
  return from_offdiagonal_rates(r);
}

}  // namespace

TEST(AdjacencyGraph, Examples) {
  const auto g = adjacency_graph(validate_kolmogorov(Matrix{{-1, 2}, {1, -2}}));
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_EQ(g.edge_count(), 2u);

  const auto h = adjacency_graph(validate_kolmogorov(Matrix{{0, 1}, {0, -1}}));
  EXPECT_TRUE(h.has_edge(1, 0));
  EXPECT_EQ(h.edge_count(), 1u);

  EXPECT_EQ(adjacency_graph(validate_kolmogorov(Matrix(3, 3, 0.0))).edge_count(), 0u);
}

TEST(IsIrreducible, Examples) {
  EXPECT_TRUE(is_irreducible(validate_kolmogorov(Matrix{{-1, 2}, {1, -2}})));
  EXPECT_FALSE(is_irreducible(validate_kolmogorov(Matrix{{0, 1}, {0, -1}})));
  EXPECT_TRUE(is_irreducible(
      from_offdiagonal_rates(Matrix{{0, 0, 1}, {1, 0, 0}, {0, 1, 0}})));
  EXPECT_TRUE(is_irreducible(validate_kolmogorov(Matrix{{0.0}})));
  EXPECT_FALSE(is_irreducible(validate_kolmogorov(Matrix(2, 2, 0.0))));
}

TEST(SccTarjan, DeepChainNoRecursion) {
  // A 20000-node path would overflow a recursive implementation's stack.
  PatchGraph g;
  g.n = 20000;
  g.successors.resize(g.n);
  for (std::size_t v = 0; v + 1 < g.n; ++v) g.successors[v].push_back(v + 1);
  g.successors.back().push_back(0);
  EXPECT_EQ(strongly_connected_components(g).count, 1u);
  g.successors.back().clear();
  EXPECT_EQ(strongly_connected_components(g).count, g.n);
}

TEST(NormalFormOp, AbsorbingPair) {
  const auto nf = normal_form(validate_kolmogorov(Matrix{{0, 1}, {0, -1}}));
  EXPECT_EQ(nf.permutation, (Idx{0, 1}));
  ASSERT_EQ(nf.blocks.size(), 2u);
  EXPECT_EQ(nf.blocks[0].kind, BlockKind::Closed);
  EXPECT_EQ(nf.blocks[0].original_indices, (Idx{0}));
  EXPECT_EQ(nf.blocks[1].kind, BlockKind::Transient);
  EXPECT_EQ(nf.blocks[1].original_indices, (Idx{1}));
  EXPECT_EQ(nf.m, 1u);
  EXPECT_EQ(classify_states(nf),
            (std::vector<BlockKind>{BlockKind::Closed, BlockKind::Transient}));
}

TEST(NormalFormOp, TwoDisjointCycles) {
  const auto nf = normal_form(two_cycles());
  EXPECT_EQ(nf.m, 2u);
  EXPECT_EQ(nf.transient_count(), 0u);
  EXPECT_EQ(nf.blocks[0].original_indices, (Idx{0, 1}));
  EXPECT_EQ(nf.blocks[1].original_indices, (Idx{2, 3}));
}

TEST(NormalFormOp, TransientChain) {
  const auto nf = normal_form(chain_example());
  ASSERT_EQ(nf.blocks.size(), 3u);
  EXPECT_EQ(nf.blocks[0].original_indices, (Idx{0, 1}));
  EXPECT_EQ(nf.blocks[1].original_indices, (Idx{2}));
  EXPECT_EQ(nf.blocks[2].original_indices, (Idx{3}));
  EXPECT_EQ(nf.blocks[1].kind, BlockKind::Transient);
  EXPECT_EQ(nf.blocks[2].kind, BlockKind::Transient);
  EXPECT_EQ(classify_states(nf),
            (std::vector<BlockKind>{BlockKind::Closed, BlockKind::Closed,
                                    BlockKind::Transient, BlockKind::Transient}));
}

TEST(NormalFormOp, ChainOrderIndependentOfLabels) {
  // Same chain with the patches relabelled: 4 -> 1 -> {2,3}.
  Matrix r(4, 4, 0.0);
  r(1, 2) = 2.0;
  r(2, 1) = 1.0;
  r(1, 0) = 1.0;  // 1 -> 2
  r(0, 3) = 0.5;  // 4 -> 1
  const auto nf = normal_form(from_offdiagonal_rates(r));
  EXPECT_EQ(nf.permutation, (Idx{1, 2, 0, 3}));
  EXPECT_EQ(nf.blocks[1].original_indices, (Idx{0}));
  EXPECT_EQ(nf.blocks[2].original_indices, (Idx{3}));
}

TEST(NormalFormOp, IrreducibleIsSingleClosedBlock) {
  const auto nf = normal_form(validate_kolmogorov(Matrix{{-1, 2}, {1, -2}}));
  EXPECT_EQ(nf.m, 1u);
  EXPECT_EQ(nf.blocks.size(), 1u);
  EXPECT_EQ(classify_states(nf),
            (std::vector<BlockKind>{BlockKind::Closed, BlockKind::Closed}));
}

namespace {

// Checks every structural invariant of a normal form against the matrix.
void expect_normal_form_invariants(const TransitionMatrix& c, const NormalForm& nf) {
  const std::size_t n = c.n();
  ASSERT_EQ(nf.n(), n);
  EXPECT_EQ(unpermute(nf), c.entries());

  std::vector<std::size_t> block_at(n);
  bool seen_transient = false;
  for (std::size_t b = 0; b < nf.blocks.size(); ++b) {
    const auto& blk = nf.blocks[b];
    if (blk.kind == BlockKind::Transient) seen_transient = true;
    EXPECT_FALSE(seen_transient && blk.kind == BlockKind::Closed)
        << "closed block after a transient one";
    for (std::size_t p = blk.begin; p < blk.end; ++p) block_at[p] = b;
  }
  const Matrix& pm = nf.permuted_matrix;
  for (std::size_t col = 0; col < n; ++col) {
    for (std::size_t row = 0; row < n; ++row) {
      const auto bc = block_at[col], br = block_at[row];
      if (nf.blocks[bc].kind == BlockKind::Closed && br != bc) {
        EXPECT_EQ(pm(row, col), 0.0) << "closed column leaks";
      }
      if (br > bc) {
        EXPECT_EQ(pm(row, col), 0.0) << "below block diagonal";
      }
    }
  }
  for (const auto& blk : nf.blocks) {
    const Matrix sub = c.entries().submatrix(blk.original_indices, blk.original_indices);
    if (blk.kind == BlockKind::Closed) {
      const auto closed = validate_kolmogorov(sub);
      EXPECT_TRUE(is_irreducible(closed));
    } else {
      EXPECT_LT(spectral_bound_of(full_spectrum(sub)), 0.0);
      // Some mass leaves the block towards an earlier one.
      bool leaks = false;
      for (std::size_t col = blk.begin; col < blk.end; ++col)
        for (std::size_t row = 0; row < blk.begin; ++row)
          leaks = leaks || pm(row, col) > 0.0;
      EXPECT_TRUE(leaks);
    }
  }
  EXPECT_EQ(is_irreducible(c), nf.m == 1 && nf.transient_count() == 0);
}

}  // namespace

TEST(NormalFormProperty, RecoversPlantedStructure) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const auto planted = oracle::random_reducible(rng);
    const auto c = from_offdiagonal_rates(planted.rates);
    const auto nf = normal_form(c);
    expect_normal_form_invariants(c, nf);

    auto closed = planted.closed;
    std::sort(closed.begin(), closed.end());
    std::vector<Idx> got_closed, got_transient;
    for (const auto& b : nf.blocks)
      (b.kind == BlockKind::Closed ? got_closed : got_transient)
          .push_back(b.original_indices);
    EXPECT_EQ(got_closed, closed);
    auto transient = planted.transient;
    std::sort(transient.begin(), transient.end());
    std::sort(got_transient.begin(), got_transient.end());
    EXPECT_EQ(got_transient, transient);
  }
}

TEST(NormalFormProperty, IrreducibleRandom) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = from_offdiagonal_rates(
        oracle::random_irreducible_rates(1 + trial % 9, rng, 0.2));
    const auto nf = normal_form(c);
    expect_normal_form_invariants(c, nf);
    EXPECT_TRUE(is_irreducible(c));
  }
}
