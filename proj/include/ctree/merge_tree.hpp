#pragma once

#include <algorithm>
#include <numeric>
#include <utility>
#include <vector>

#include "ctree/graph.hpp"
#include "ctree/grid.hpp"
#include "ctree/union_find.hpp"

namespace ctree {

enum class SweepDirection { join, split };

/// Fully augmented merge tree: every vertex keeps its arc to the next vertex
/// reached by the sweep (join: lower, split: higher). Indices are local to the
/// graph the tree was built from.
struct MergeTree {
  SweepDirection direction = SweepDirection::join;
  std::vector<VertexId> ids;
  std::vector<double> values;
  std::vector<int> arc_to;  // -1 at the root

  std::size_t size() const { return arc_to.size(); }

  std::vector<int> child_counts() const {
    std::vector<int> count(arc_to.size(), 0);
    for (int t : arc_to) {
      if (t >= 0) ++count[static_cast<std::size_t>(t)];
    }
    return count;
  }

  /// Leaves, branch points and the root.
  std::vector<int> supernodes() const {
    const auto count = child_counts();
    std::vector<int> out;
    for (std::size_t v = 0; v < arc_to.size(); ++v) {
      if (count[v] != 1 || arc_to[v] < 0) out.push_back(static_cast<int>(v));
    }
    return out;
  }

  /// Superarcs as (sweep-earlier supernode, sweep-later supernode) global ids, sorted.
  std::vector<std::pair<VertexId, VertexId>> superarcs() const {
    const auto count = child_counts();
    auto is_super = [&](int v) {
      return count[static_cast<std::size_t>(v)] != 1 || arc_to[static_cast<std::size_t>(v)] < 0;
    };
    std::vector<std::pair<VertexId, VertexId>> out;
    for (int s : supernodes()) {
      int v = arc_to[static_cast<std::size_t>(s)];
      if (v < 0) continue;
      while (!is_super(v)) v = arc_to[static_cast<std::size_t>(v)];
      out.emplace_back(ids[static_cast<std::size_t>(s)], ids[static_cast<std::size_t>(v)]);
    }
    std::sort(out.begin(), out.end());
    return out;
  }
};

namespace detail {

inline MergeTree sweep(const TopologyGraph& graph, const std::vector<int>& sweep_order,
                       SweepDirection direction) {
  const std::size_t n = graph.size();
  MergeTree tree;
  tree.direction = direction;
  tree.ids = graph.ids();
  tree.values = graph.values();
  tree.arc_to.assign(n, -1);

  UnionFind components(n);
  std::vector<int> frontier(n, -1);  // per component root: latest vertex reached by the sweep
  std::vector<char> processed(n, 0);
  std::vector<std::size_t> roots;

  for (int v : sweep_order) {
    roots.clear();
    for (int u : graph.adjacent(v)) {
      if (processed[static_cast<std::size_t>(u)]) roots.push_back(components.find(static_cast<std::size_t>(u)));
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    for (std::size_t r : roots) {
      tree.arc_to[static_cast<std::size_t>(frontier[r])] = v;
      components.unite(r, static_cast<std::size_t>(v));
    }
    processed[static_cast<std::size_t>(v)] = 1;
    frontier[components.find(static_cast<std::size_t>(v))] = v;
  }
  return tree;
}

inline std::vector<int> ascending_order(const TopologyGraph& graph) {
  std::vector<int> order(graph.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return graph.key(a) < graph.key(b); });
  return order;
}

}  // namespace detail

inline MergeTree compute_join_tree(const TopologyGraph& graph, std::vector<int> ascending) {
  std::reverse(ascending.begin(), ascending.end());
  return detail::sweep(graph, ascending, SweepDirection::join);
}

inline MergeTree compute_split_tree(const TopologyGraph& graph, const std::vector<int>& ascending) {
  return detail::sweep(graph, ascending, SweepDirection::split);
}

inline MergeTree compute_join_tree(const TopologyGraph& graph) {
  return compute_join_tree(graph, detail::ascending_order(graph));
}

inline MergeTree compute_split_tree(const TopologyGraph& graph) {
  return compute_split_tree(graph, detail::ascending_order(graph));
}

namespace detail {

inline std::vector<int> checked_order(const ScalarGrid& grid, const VertexOrder& order) {
  if (static_cast<std::int64_t>(order.size()) != grid.size()) {
    throw UsageError("vertex order does not match grid size");
  }
  return {order.by_rank.begin(), order.by_rank.end()};
}

}  // namespace detail

// Whole-grid variants: local index == global vertex id.
inline MergeTree compute_join_tree(const ScalarGrid& grid, const VertexOrder& order) {
  return compute_join_tree(TopologyGraph::from_grid(grid, Box::whole(grid.dims())),
                           detail::checked_order(grid, order));
}

inline MergeTree compute_split_tree(const ScalarGrid& grid, const VertexOrder& order) {
  return compute_split_tree(TopologyGraph::from_grid(grid, Box::whole(grid.dims())),
                            detail::checked_order(grid, order));
}

}  // namespace ctree
