#pragma once

#include <algorithm>
#include <charconv>
#include <deque>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctree/errors.hpp"
#include "ctree/graph.hpp"
#include "ctree/merge_tree.hpp"

namespace ctree {

/// Contour tree over a vertex set. Every vertex is kept (with the augmented
/// regular arcs); supernodes carry the superstructure. A superarc is indexed by
/// the supernode index of its outer end (the end away from the root), so
/// `inner[s]` is the other end of superarc `s` and the root has no superarc.
struct ContourTree {
  std::vector<VertexId> ids;
  std::vector<double> values;
  std::vector<std::pair<int, int>> regular_arcs;  // augmented edges, local indices

  std::vector<int> supernodes;       // local indices, ascending global id
  std::vector<int> supernode_index;  // local index -> supernode index, or -1
  std::vector<int> inner;            // supernode index -> inner end, -1 for the root
  std::vector<int> first_step;       // supernode index -> neighbour toward inner end
  int root = -1;

  std::vector<int> superparent;  // local index -> superarc; empty until augment()

  std::unordered_map<VertexId, int> local_of;

  std::size_t vertex_count() const { return ids.size(); }
  std::size_t supernode_count() const { return supernodes.size(); }
  std::size_t superarc_count() const { return supernodes.empty() ? 0 : supernodes.size() - 1; }
  bool augmented() const { return !ids.empty() && superparent.size() == ids.size(); }

  VertexKey key(int local) const {
    return {values[static_cast<std::size_t>(local)], ids[static_cast<std::size_t>(local)]};
  }
  VertexKey node_key(int s) const { return key(supernodes[static_cast<std::size_t>(s)]); }
  VertexId node_id(int s) const { return ids[static_cast<std::size_t>(supernodes[static_cast<std::size_t>(s)])]; }
  double node_value(int s) const { return values[static_cast<std::size_t>(supernodes[static_cast<std::size_t>(s)])]; }

  int local(VertexId v) const {
    auto it = local_of.find(v);
    return it == local_of.end() ? -1 : it->second;
  }
  /// Supernode index of a global id, or -1.
  int find_node(VertexId v) const {
    const int l = local(v);
    return l < 0 ? -1 : supernode_index[static_cast<std::size_t>(l)];
  }

  std::vector<std::vector<int>> children() const {
    std::vector<std::vector<int>> out(supernodes.size());
    for (std::size_t s = 0; s < supernodes.size(); ++s) {
      if (inner[s] >= 0) out[static_cast<std::size_t>(inner[s])].push_back(static_cast<int>(s));
    }
    return out;
  }

  /// Superarcs as (outer id, inner id), sorted by outer id.
  std::vector<std::pair<VertexId, VertexId>> superarcs() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (std::size_t s = 0; s < supernodes.size(); ++s) {
      if (inner[s] >= 0) out.emplace_back(node_id(static_cast<int>(s)), node_id(inner[s]));
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  /// Superarcs whose endpoint keys straddle the isovalue just above `below`.
  std::int64_t count_straddling(const VertexKey& below) const {
    std::int64_t count = 0;
    for (std::size_t s = 0; s < supernodes.size(); ++s) {
      if (inner[s] < 0) continue;
      auto a = node_key(static_cast<int>(s));
      auto b = node_key(inner[s]);
      if (b < a) std::swap(a, b);
      if (!(below < a) && below < b) ++count;
    }
    return count;
  }
};

namespace detail {

inline std::vector<std::vector<int>> adjacency_lists(std::size_t n,
                                                     const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  return adj;
}

}  // namespace detail

/// Builds the superstructure of an augmented tree. `avoid_root` (optional, per
/// local vertex) marks supernodes that should not be chosen as root when another
/// candidate exists; `force_super` marks vertices kept as supernodes even when
/// regular. Superparents are set for supernodes only; call augment().
inline ContourTree build_superstructure(std::vector<VertexId> ids, std::vector<double> values,
                                        std::vector<std::pair<int, int>> edges,
                                        std::span<const char> avoid_root = {},
                                        std::span<const char> force_super = {}) {
  const std::size_t n = ids.size();
  if (n == 0) throw UsageError("contour tree over an empty vertex set");
  if (edges.size() + 1 != n) {
    throw InternalError("augmented tree has " + std::to_string(edges.size()) + " edges over " +
                        std::to_string(n) + " vertices");
  }
  ContourTree ct;
  ct.ids = std::move(ids);
  ct.values = std::move(values);
  ct.regular_arcs = std::move(edges);
  ct.local_of.reserve(n);
  for (std::size_t i = 0; i < n; ++i) ct.local_of.emplace(ct.ids[i], static_cast<int>(i));

  const auto adj = detail::adjacency_lists(n, ct.regular_arcs);
  std::vector<char> is_super(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    int up = 0;
    int down = 0;
    for (int u : adj[v]) (ct.key(static_cast<int>(v)) < ct.key(u) ? up : down)++;
    is_super[v] = !(up == 1 && down == 1) || (!force_super.empty() && force_super[v]);
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (is_super[v]) ct.supernodes.push_back(static_cast<int>(v));
  }
  std::sort(ct.supernodes.begin(), ct.supernodes.end(),
            [&](int a, int b) { return ct.ids[static_cast<std::size_t>(a)] < ct.ids[static_cast<std::size_t>(b)]; });
  ct.supernode_index.assign(n, -1);
  for (std::size_t s = 0; s < ct.supernodes.size(); ++s) {
    ct.supernode_index[static_cast<std::size_t>(ct.supernodes[s])] = static_cast<int>(s);
  }

  // Superarc adjacency: (other supernode, first step from this end).
  const std::size_t t = ct.supernodes.size();
  std::vector<std::vector<std::pair<int, int>>> super_adj(t);
  for (std::size_t s = 0; s < t; ++s) {
    const int start = ct.supernodes[s];
    for (int step : adj[static_cast<std::size_t>(start)]) {
      int prev = start;
      int cur = step;
      while (!is_super[static_cast<std::size_t>(cur)]) {
        const auto& nb = adj[static_cast<std::size_t>(cur)];
        const int next = nb[0] == prev ? nb[1] : nb[0];
        prev = cur;
        cur = next;
      }
      super_adj[s].emplace_back(ct.supernode_index[static_cast<std::size_t>(cur)], step);
    }
  }

  int root = -1;
  int fallback = -1;
  for (std::size_t s = 0; s < t; ++s) {
    const int v = ct.supernodes[s];
    if (fallback < 0 || ct.node_key(fallback) < ct.key(v)) fallback = static_cast<int>(s);
    const bool avoided = !avoid_root.empty() && avoid_root[static_cast<std::size_t>(v)];
    if (!avoided && (root < 0 || ct.node_key(root) < ct.key(v))) root = static_cast<int>(s);
  }
  ct.root = root >= 0 ? root : fallback;

  ct.inner.assign(t, -1);
  ct.first_step.assign(t, -1);
  std::vector<char> seen(t, 0);
  std::deque<int> queue{ct.root};
  seen[static_cast<std::size_t>(ct.root)] = 1;
  while (!queue.empty()) {
    const int s = queue.front();
    queue.pop_front();
    for (auto [e, step] : super_adj[static_cast<std::size_t>(s)]) {
      (void)step;
      if (seen[static_cast<std::size_t>(e)]) continue;
      seen[static_cast<std::size_t>(e)] = 1;
      ct.inner[static_cast<std::size_t>(e)] = s;
      for (auto [back, back_step] : super_adj[static_cast<std::size_t>(e)]) {
        if (back == s) ct.first_step[static_cast<std::size_t>(e)] = back_step;
      }
      queue.push_back(e);
    }
  }
  for (std::size_t s = 0; s < t; ++s) {
    if (!seen[s]) throw InternalError("augmented tree is disconnected");
  }
  return ct;
}

/// Assigns every regular vertex to the superarc it lies on.
inline void augment(ContourTree& ct) {
  const std::size_t n = ct.ids.size();
  ct.superparent.assign(n, -1);
  const auto adj = detail::adjacency_lists(n, ct.regular_arcs);
  for (std::size_t s = 0; s < ct.supernodes.size(); ++s) {
    ct.superparent[static_cast<std::size_t>(ct.supernodes[s])] = static_cast<int>(s);
  }
  for (std::size_t s = 0; s < ct.supernodes.size(); ++s) {
    if (ct.inner[s] < 0) continue;
    int prev = ct.supernodes[s];
    int cur = ct.first_step[s];
    while (ct.supernode_index[static_cast<std::size_t>(cur)] < 0) {
      ct.superparent[static_cast<std::size_t>(cur)] = static_cast<int>(s);
      const auto& nb = adj[static_cast<std::size_t>(cur)];
      const int next = nb[0] == prev ? nb[1] : nb[0];
      prev = cur;
      cur = next;
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (ct.superparent[v] < 0) throw InternalError("vertex left without a superarc");
  }
}

/// Serial leaf transfer from fully augmented join and split trees; returns the
/// augmented contour tree edges over local indices.
inline std::vector<std::pair<int, int>> transfer_leaves(const MergeTree& join, const MergeTree& split) {
  if (join.size() != split.size() || join.ids != split.ids) {
    throw UsageError("join and split trees are over different vertex sets");
  }
  if (join.direction != SweepDirection::join || split.direction != SweepDirection::split) {
    throw UsageError("transfer_leaves expects a join tree and a split tree");
  }
  const std::size_t n = join.size();
  std::vector<int> join_down = join.arc_to;   // toward lower values
  std::vector<int> split_up = split.arc_to;   // toward higher values
  std::vector<int> join_up_degree(n, 0);
  std::vector<int> split_down_degree(n, 0);
  std::vector<std::int64_t> join_child_sum(n, 0);
  std::vector<std::int64_t> split_child_sum(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    if (join_down[v] >= 0) {
      ++join_up_degree[static_cast<std::size_t>(join_down[v])];
      join_child_sum[static_cast<std::size_t>(join_down[v])] += static_cast<std::int64_t>(v);
    }
    if (split_up[v] >= 0) {
      ++split_down_degree[static_cast<std::size_t>(split_up[v])];
      split_child_sum[static_cast<std::size_t>(split_up[v])] += static_cast<std::int64_t>(v);
    }
  }
  auto upper_leaf = [&](std::size_t v) { return join_up_degree[v] == 0 && split_down_degree[v] == 1; };
  auto lower_leaf = [&](std::size_t v) { return split_down_degree[v] == 0 && join_up_degree[v] == 1; };

  std::vector<char> alive(n, 1);
  std::deque<int> queue;
  for (std::size_t v = 0; v < n; ++v) {
    if (upper_leaf(v) || lower_leaf(v)) queue.push_back(static_cast<int>(v));
  }
  std::vector<std::pair<int, int>> edges;
  edges.reserve(n == 0 ? 0 : n - 1);
  std::size_t remaining = n;
  while (remaining > 1) {
    if (queue.empty()) throw InternalError("leaf transfer stalled with vertices remaining");
    const auto v = static_cast<std::size_t>(queue.front());
    queue.pop_front();
    if (!alive[v]) continue;
    if (upper_leaf(v)) {
      const int p = join_down[v];
      edges.emplace_back(static_cast<int>(v), p);
      --join_up_degree[static_cast<std::size_t>(p)];
      join_child_sum[static_cast<std::size_t>(p)] -= static_cast<std::int64_t>(v);
      const auto c = static_cast<std::size_t>(split_child_sum[v]);
      const int q = split_up[v];
      split_up[c] = q;
      if (q >= 0) split_child_sum[static_cast<std::size_t>(q)] += static_cast<std::int64_t>(c) - static_cast<std::int64_t>(v);
      if (upper_leaf(static_cast<std::size_t>(p)) || lower_leaf(static_cast<std::size_t>(p))) queue.push_back(p);
    } else if (lower_leaf(v)) {
      const int q = split_up[v];
      edges.emplace_back(static_cast<int>(v), q);
      --split_down_degree[static_cast<std::size_t>(q)];
      split_child_sum[static_cast<std::size_t>(q)] -= static_cast<std::int64_t>(v);
      const auto c = static_cast<std::size_t>(join_child_sum[v]);
      const int p = join_down[v];
      join_down[c] = p;
      if (p >= 0) join_child_sum[static_cast<std::size_t>(p)] += static_cast<std::int64_t>(c) - static_cast<std::int64_t>(v);
      if (upper_leaf(static_cast<std::size_t>(q)) || lower_leaf(static_cast<std::size_t>(q))) queue.push_back(q);
    } else {
      continue;
    }
    alive[v] = 0;
    --remaining;
  }
  return edges;
}

/// Contour tree superstructure from join and split trees (superparents of
/// regular vertices are filled by augment()).
inline ContourTree combine(const MergeTree& join, const MergeTree& split,
                           std::span<const char> avoid_root = {}) {
  auto edges = transfer_leaves(join, split);
  return build_superstructure(join.ids, join.values, std::move(edges), avoid_root);
}

/// Augmented contour tree of an arbitrary topology graph.
inline ContourTree compute_contour_tree(const TopologyGraph& graph) {
  const auto ascending = detail::ascending_order(graph);
  auto ct = combine(compute_join_tree(graph, ascending), compute_split_tree(graph, ascending));
  augment(ct);
  return ct;
}

inline ContourTree compute_contour_tree(const ScalarGrid& grid) {
  return compute_contour_tree(TopologyGraph::from_grid(grid, Box::whole(grid.dims())));
}

/// Augmented tree as a global-id fragment.
inline TreePiece to_piece(const ContourTree& ct) {
  TreePiece piece{ct.ids, ct.values, {}};
  piece.edges.reserve(ct.regular_arcs.size());
  for (auto [a, b] : ct.regular_arcs) {
    piece.edges.emplace_back(ct.ids[static_cast<std::size_t>(a)], ct.ids[static_cast<std::size_t>(b)]);
  }
  return piece;
}

/// Contour tree of an augmented tree given as a global-id fragment.
inline ContourTree contour_tree_from_piece(const TreePiece& piece, std::span<const char> avoid_root = {},
                                           std::span<const char> force_super = {}) {
  std::unordered_map<VertexId, int> local;
  local.reserve(piece.ids.size());
  for (std::size_t i = 0; i < piece.ids.size(); ++i) local.emplace(piece.ids[i], static_cast<int>(i));
  std::vector<std::pair<int, int>> edges;
  edges.reserve(piece.edges.size());
  for (auto [a, b] : piece.edges) edges.emplace_back(local.at(a), local.at(b));
  auto ct = build_superstructure(piece.ids, piece.values, std::move(edges), avoid_root, force_super);
  augment(ct);
  return ct;
}

inline std::string format_value(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

/// Debug dump: supernodes (id, value, rank among tree vertices) and superarcs
/// (outer -> inner), both ordered by id.
inline void dump(const ContourTree& ct, std::ostream& os) {
  std::vector<int> order(ct.ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ct.key(a) < ct.key(b); });
  std::vector<std::size_t> rank(ct.ids.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = r;

  os << "supernodes " << ct.supernodes.size() << "\n";
  for (int v : ct.supernodes) {
    os << ct.ids[static_cast<std::size_t>(v)] << ' ' << format_value(ct.values[static_cast<std::size_t>(v)])
       << ' ' << rank[static_cast<std::size_t>(v)] << "\n";
  }
  os << "superarcs " << ct.superarc_count() << "\n";
  for (auto [outer, in] : ct.superarcs()) os << outer << " -> " << in << "\n";
}

}  // namespace ctree
