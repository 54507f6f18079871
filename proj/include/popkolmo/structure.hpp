#ifndef POPKOLMO_STRUCTURE_HPP
#define POPKOLMO_STRUCTURE_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <limits>
#include <queue>
#include <string_view>
#include <utility>
#include <vector>

#include "popkolmo/kolmogorov.hpp"
#include "popkolmo/matrix.hpp"

namespace popkolmo {

/// Directed patch graph: edge j -> i iff c_ij > 0 with i != j.
struct PatchGraph {
  std::size_t n = 0;
  /// successors[j] lists the patches i reachable from j in one transition,
  /// in increasing order.
  std::vector<std::vector<std::size_t>> successors;

  std::size_t edge_count() const noexcept {
    std::size_t e = 0;
    for (const auto& s : successors) e += s.size();
    return e;
  }
  bool has_edge(std::size_t from, std::size_t to) const {
    const auto& s = successors[from];
    return std::binary_search(s.begin(), s.end(), to);
  }
};

inline PatchGraph adjacency_graph(const TransitionMatrix& c) {
  PatchGraph g;
  g.n = c.n();
  g.successors.resize(g.n);
  for (std::size_t j = 0; j < g.n; ++j)
    for (std::size_t i = 0; i < g.n; ++i)
      if (i != j && c(i, j) > 0.0) g.successors[j].push_back(i);
  return g;
}

/// Strongly connected components: component id per node. Ids are assigned
/// in the order Tarjan's algorithm completes them, so an edge u -> v between
/// different components always has component[u] > component[v].
struct SccResult {
  std::vector<std::size_t> component;
  std::size_t count = 0;
};

/// Tarjan's algorithm with an explicit call stack.
inline SccResult strongly_connected_components(const PatchGraph& g) {
  constexpr std::size_t unvisited = std::numeric_limits<std::size_t>::max();
  const std::size_t n = g.n;
  std::vector<std::size_t> index(n, unvisited), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  SccResult out;
  out.component.assign(n, unvisited);
  std::size_t next_index = 0;

  struct Frame {
    std::size_t node;
    std::size_t next_edge;
  };
  std::vector<Frame> calls;

  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != unvisited) continue;
    calls.push_back({root, 0});
    index[root] = lowlink[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;

    while (!calls.empty()) {
      Frame& f = calls.back();
      const auto& succ = g.successors[f.node];
      if (f.next_edge < succ.size()) {
        const std::size_t w = succ[f.next_edge++];
        if (index[w] == unvisited) {
          index[w] = lowlink[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          calls.push_back({w, 0});
        } else if (on_stack[w]) {
          lowlink[f.node] = std::min(lowlink[f.node], index[w]);
        }
        continue;
      }
      const std::size_t v = f.node;
      calls.pop_back();
      if (!calls.empty()) {
        const std::size_t parent = calls.back().node;
        lowlink[parent] = std::min(lowlink[parent], lowlink[v]);
      }
      if (lowlink[v] == index[v]) {
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          out.component[w] = out.count;
        } while (w != v);
        ++out.count;
      }
    }
  }
  return out;
}

inline bool is_irreducible(const TransitionMatrix& c) {
  if (c.n() == 1) return true;
  return strongly_connected_components(adjacency_graph(c)).count == 1;
}

enum class BlockKind { Closed, Transient };

constexpr std::string_view to_string(BlockKind k) noexcept {
  return k == BlockKind::Closed ? "closed" : "transient";
}

struct NormalFormBlock {
  BlockKind kind = BlockKind::Closed;
  /// Half-open range [begin, end) of positions in the permuted order.
  std::size_t begin = 0;
  std::size_t end = 0;
  /// Original patch indices (0-based, ascending).
  std::vector<std::size_t> original_indices;

  std::size_t size() const noexcept { return end - begin; }
};

/// Block decomposition P C P^T: closed (irreducible, no outflow) blocks on
/// the diagonal first, then transient blocks forming a block upper
/// triangular tail whose columns leak mass into earlier blocks.
struct NormalForm {
  /// permutation[p] is the original index placed at position p.
  std::vector<std::size_t> permutation;
  std::vector<NormalFormBlock> blocks;
  /// Number of closed blocks.
  std::size_t m = 0;
  Matrix permuted_matrix;

  std::size_t n() const noexcept { return permutation.size(); }
  std::size_t transient_count() const noexcept { return blocks.size() - m; }
};

/// Computes the normal form.
///
/// Ordering: closed blocks by smallest member; transient blocks so that a
/// block feeding another comes after it (sinks of the transient condensation
/// first), ties broken by smallest member. Orderings among closed blocks and
/// among incomparable transient blocks are otherwise free; this is one
/// deterministic choice.
inline NormalForm normal_form(const TransitionMatrix& c) {
  const PatchGraph g = adjacency_graph(c);
  const SccResult scc = strongly_connected_components(g);
  const std::size_t n = g.n;
  const std::size_t k = scc.count;

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t v = 0; v < n; ++v) members[scc.component[v]].push_back(v);

  // Condensation edges and closedness.
  std::vector<std::vector<std::size_t>> cond_succ(k);
  std::vector<bool> closed(k, true);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : g.successors[v]) {
      const std::size_t a = scc.component[v], b = scc.component[w];
      if (a != b) {
        closed[a] = false;
        cond_succ[a].push_back(b);
      }
    }
  }
  for (auto& s : cond_succ) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  auto min_member = [&](std::size_t comp) { return members[comp].front(); };

  std::vector<std::size_t> order;
  order.reserve(k);
  for (std::size_t comp = 0; comp < k; ++comp)
    if (closed[comp]) order.push_back(comp);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return min_member(a) < min_member(b);
  });
  const std::size_t m = order.size();

  // Place a transient component once all transient components it feeds
  // are placed.
  std::vector<std::size_t> pending(k, 0);
  std::vector<std::vector<std::size_t>> fed_by(k);
  for (std::size_t a = 0; a < k; ++a) {
    if (closed[a]) continue;
    for (std::size_t b : cond_succ[a]) {
      if (closed[b]) continue;
      ++pending[a];
      fed_by[b].push_back(a);
    }
  }
  using Entry = std::pair<std::size_t, std::size_t>;  // (min member, comp)
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> ready;
  for (std::size_t a = 0; a < k; ++a)
    if (!closed[a] && pending[a] == 0) ready.emplace(min_member(a), a);
  while (!ready.empty()) {
    const std::size_t a = ready.top().second;
    ready.pop();
    order.push_back(a);
    for (std::size_t src : fed_by[a])
      if (--pending[src] == 0) ready.emplace(min_member(src), src);
  }

  NormalForm nf;
  nf.m = m;
  nf.permutation.reserve(n);
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::size_t comp = order[pos];
    NormalFormBlock block;
    block.kind = pos < m ? BlockKind::Closed : BlockKind::Transient;
    block.begin = nf.permutation.size();
    block.original_indices = members[comp];
    nf.permutation.insert(nf.permutation.end(), members[comp].begin(),
                          members[comp].end());
    block.end = nf.permutation.size();
    nf.blocks.push_back(std::move(block));
  }
  nf.permuted_matrix = c.entries().submatrix(nf.permutation, nf.permutation);
  return nf;
}

/// Closed/transient label per original patch index.
inline std::vector<BlockKind> classify_states(const NormalForm& nf) {
  std::vector<BlockKind> labels(nf.n(), BlockKind::Closed);
  for (const auto& b : nf.blocks)
    for (std::size_t v : b.original_indices) labels[v] = b.kind;
  return labels;
}

/// Undoes the normal-form permutation: returns Q with
/// Q(perm[a], perm[b]) = permuted(a, b).
inline Matrix unpermute(const NormalForm& nf) {
  const std::size_t n = nf.n();
  Matrix out(n, n);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      out(nf.permutation[a], nf.permutation[b]) = nf.permuted_matrix(a, b);
  return out;
}

}  // namespace popkolmo

#endif  // POPKOLMO_STRUCTURE_HPP
