#pragma once

// Brute-force references. Only the grid stencil is shared with the library;
// nothing here calls merge-tree or contour-tree code.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <unordered_map>
#include <vector>

#include "ctree/contour_tree.hpp"
#include "ctree/errors.hpp"
#include "ctree/grid.hpp"

namespace ctree::oracle {

namespace detail {

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    return i;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

inline std::vector<std::int64_t> ranks(const ScalarGrid& grid) {
  std::vector<VertexId> order(static_cast<std::size_t>(grid.size()));
  std::iota(order.begin(), order.end(), VertexId{0});
  std::stable_sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
    return grid.value(a) < grid.value(b);
  });
  std::vector<std::int64_t> rank(order.size());
  for (std::size_t r = 0; r < order.size(); ++r) rank[static_cast<std::size_t>(order[r])] = static_cast<std::int64_t>(r);
  return rank;
}

// Calls fn(vertices) for every top-dimensional simplex of the Freudenthal
// triangulation: in each cell, one simplex per ordering of the active axes.
template <class Fn>
void for_each_simplex(const Dims& dims, Fn&& fn) {
  std::vector<int> axes;
  for (int a = 0; a < 3; ++a) {
    if (dims[a] > 1) axes.push_back(a);
  }
  const auto cells = [&](int a) { return dims[a] > 1 ? dims[a] - 1 : 1; };
  std::vector<VertexId> simplex;
  for (std::int64_t z = 0; z < cells(2); ++z) {
    for (std::int64_t y = 0; y < cells(1); ++y) {
      for (std::int64_t x = 0; x < cells(0); ++x) {
        std::vector<int> perm = axes;
        do {
          Coord c{x, y, z};
          simplex.clear();
          simplex.push_back(c.x + dims.nx * (c.y + dims.ny * c.z));
          for (int a : perm) {
            c[a] += 1;
            simplex.push_back(c.x + dims.nx * (c.y + dims.ny * c.z));
          }
          fn(simplex);
        } while (std::next_permutation(perm.begin(), perm.end()));
      }
    }
  }
}

}  // namespace detail

/// Contours crossing the gap between SoS ranks `gap` and `gap + 1`.
inline std::int64_t count_contours(const ScalarGrid& grid, std::int64_t gap) {
  const auto n = grid.size();
  if (gap < 0 || gap + 1 >= n) throw UsageError("gap index out of range");
  const auto rank = detail::ranks(grid);
  auto below = [&](VertexId v) { return rank[static_cast<std::size_t>(v)] <= gap; };

  // Index crossed stencil edges.
  std::unordered_map<std::int64_t, int> crossed;
  auto edge_key = [&](VertexId a, VertexId b) { return std::min(a, b) * n + std::max(a, b); };
  for (VertexId v = 0; v < n; ++v) {
    for_each_neighbor(grid.dims(), v, [&](VertexId u) {
      if (u > v && below(u) != below(v)) crossed.emplace(edge_key(u, v), static_cast<int>(crossed.size()));
    });
  }
  if (crossed.empty()) return 0;

  detail::Dsu dsu(crossed.size());
  std::vector<int> in_simplex;
  detail::for_each_simplex(grid.dims(), [&](const std::vector<VertexId>& s) {
    in_simplex.clear();
    for (std::size_t i = 0; i < s.size(); ++i) {
      for (std::size_t j = i + 1; j < s.size(); ++j) {
        if (below(s[i]) == below(s[j])) continue;
        in_simplex.push_back(crossed.at(edge_key(s[i], s[j])));
      }
    }
    for (std::size_t k = 1; k < in_simplex.size(); ++k) dsu.unite(in_simplex[0], in_simplex[k]);
  });
  std::int64_t components = 0;
  for (std::size_t i = 0; i < crossed.size(); ++i) {
    if (dsu.find(static_cast<int>(i)) == static_cast<int>(i)) ++components;
  }
  return components;
}

/// Contour counts for every gap.
struct LevelSetCensus {
  std::vector<std::int64_t> contours;
};

inline LevelSetCensus level_set_census(const ScalarGrid& grid) {
  LevelSetCensus census;
  for (std::int64_t g = 0; g + 1 < grid.size(); ++g) census.contours.push_back(count_contours(grid, g));
  return census;
}

/// Vertices beyond superarc `arc` (outer supernode index) when it is cut at its
/// inner end, found by flooding the augmented edges.
inline std::int64_t brute_subtree_volume(const ContourTree& ct, int arc) {
  if (!ct.augmented()) throw UsageError("brute_subtree_volume requires an augmented tree");
  if (arc < 0 || static_cast<std::size_t>(arc) >= ct.supernode_count() || ct.inner[static_cast<std::size_t>(arc)] < 0) {
    throw UsageError("not a superarc");
  }
  const std::size_t n = ct.vertex_count();
  const int outer = ct.supernodes[static_cast<std::size_t>(arc)];
  const int inner = ct.supernodes[static_cast<std::size_t>(ct.inner[static_cast<std::size_t>(arc)])];
  auto on_arc = [&](int v) {
    const auto s = ct.supernode_index[static_cast<std::size_t>(v)];
    return v == outer || (s < 0 && ct.superparent[static_cast<std::size_t>(v)] == arc);
  };

  std::vector<std::vector<int>> adj(n);
  for (auto [a, b] : ct.regular_arcs) {
    const bool cut = (a == inner && on_arc(b)) || (b == inner && on_arc(a));
    if (cut) continue;
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{outer};
  seen[static_cast<std::size_t>(outer)] = 1;
  std::int64_t count = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++count;
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  return count;
}

/// Vertices on `a`'s side once the augmented edge leaving `b` toward `a` is
/// cut. Both are global vertex ids.
inline std::int64_t side_volume(const ContourTree& ct, VertexId a, VertexId b) {
  const int la = ct.local(a);
  const int lb = ct.local(b);
  if (la < 0 || lb < 0 || la == lb) throw UsageError("side_volume needs two distinct tree vertices");
  const std::size_t n = ct.vertex_count();
  std::vector<std::vector<int>> adj(n);
  for (auto [x, y] : ct.regular_arcs) {
    adj[static_cast<std::size_t>(x)].push_back(y);
    adj[static_cast<std::size_t>(y)].push_back(x);
  }
  auto flood = [&](int from, int blocked_u, int blocked_v, std::vector<int>* parent) {
    std::vector<char> seen(n, 0);
    std::vector<int> stack{from};
    seen[static_cast<std::size_t>(from)] = 1;
    std::int64_t count = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++count;
      for (int u : adj[static_cast<std::size_t>(v)]) {
        if ((v == blocked_u && u == blocked_v) || (v == blocked_v && u == blocked_u)) continue;
        if (seen[static_cast<std::size_t>(u)]) continue;
        seen[static_cast<std::size_t>(u)] = 1;
        if (parent) (*parent)[static_cast<std::size_t>(u)] = v;
        stack.push_back(u);
      }
    }
    return count;
  };
  std::vector<int> parent(n, -1);
  flood(lb, -1, -1, &parent);
  int step = la;
  while (parent[static_cast<std::size_t>(step)] != lb) {
    step = parent[static_cast<std::size_t>(step)];
    if (step < 0) throw UsageError("side_volume vertices are not connected");
  }
  return flood(la, lb, step, nullptr);
}

}  // namespace ctree::oracle
