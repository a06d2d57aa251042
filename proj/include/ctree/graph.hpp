#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ctree/errors.hpp"
#include "ctree/grid.hpp"

namespace ctree {

/// Inclusive axis-aligned vertex box.
struct Box {
  Coord lo;
  Coord hi;

  std::int64_t extent(int axis) const { return hi[axis] - lo[axis] + 1; }
  std::int64_t size() const { return extent(0) * extent(1) * extent(2); }
  bool contains(const Coord& c) const {
    for (int a = 0; a < 3; ++a) {
      if (c[a] < lo[a] || c[a] > hi[a]) return false;
    }
    return true;
  }
  /// On a face of the box along any axis where the whole grid has extent > 1.
  bool on_face(const Coord& c, const Dims& grid_dims) const {
    for (int a = 0; a < 3; ++a) {
      if (grid_dims[a] > 1 && (c[a] == lo[a] || c[a] == hi[a])) return true;
    }
    return false;
  }
  static Box whole(const Dims& d) { return {{0, 0, 0}, {d.nx - 1, d.ny - 1, d.nz - 1}}; }
  static Box hull(const Box& a, const Box& b) {
    Box out;
    for (int i = 0; i < 3; ++i) {
      out.lo[i] = std::min(a.lo[i], b.lo[i]);
      out.hi[i] = std::max(a.hi[i], b.hi[i]);
    }
    return out;
  }
  bool operator==(const Box&) const = default;
};

/// A tree fragment stored by global vertex id.
struct TreePiece {
  std::vector<VertexId> ids;
  std::vector<double> values;
  std::vector<std::pair<VertexId, VertexId>> edges;

  std::size_t size() const { return ids.size(); }
};

/// Union of fragments by global id; shared vertices must agree on value.
inline TreePiece merge_pieces(std::span<const TreePiece* const> pieces) {
  TreePiece out;
  std::unordered_map<VertexId, std::size_t> index;
  for (const TreePiece* p : pieces) {
    for (std::size_t i = 0; i < p->ids.size(); ++i) {
      auto [it, inserted] = index.try_emplace(p->ids[i], out.ids.size());
      if (inserted) {
        out.ids.push_back(p->ids[i]);
        out.values.push_back(p->values[i]);
      } else if (out.values[it->second] != p->values[i]) {
        throw DataError("inconsistent value for shared vertex " + std::to_string(p->ids[i]));
      }
    }
  }
  for (const TreePiece* p : pieces) {
    for (auto [a, b] : p->edges) out.edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.edges.begin(), out.edges.end());
  out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
  return out;
}

/// Undirected graph over a vertex subset with compressed adjacency; vertices are
/// addressed by local index, each carrying its global id and scalar value.
class TopologyGraph {
 public:
  TopologyGraph() = default;

  std::size_t size() const { return ids_.size(); }
  VertexId id(int local) const { return ids_[static_cast<std::size_t>(local)]; }
  double value(int local) const { return values_[static_cast<std::size_t>(local)]; }
  VertexKey key(int local) const { return {value(local), id(local)}; }
  const std::vector<VertexId>& ids() const { return ids_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const int> adjacent(int local) const {
    const auto b = offsets_[static_cast<std::size_t>(local)];
    const auto e = offsets_[static_cast<std::size_t>(local) + 1];
    return {targets_.data() + b, static_cast<std::size_t>(e - b)};
  }

  std::size_t edge_count() const { return targets_.size() / 2; }

  /// Sub-grid graph of the Freudenthal stencil restricted to a box.
  static TopologyGraph from_grid(const ScalarGrid& grid, const Box& box) {
    TopologyGraph g;
    const auto n = static_cast<std::size_t>(box.size());
    g.ids_.reserve(n);
    g.values_.reserve(n);
    for (auto z = box.lo.z; z <= box.hi.z; ++z) {
      for (auto y = box.lo.y; y <= box.hi.y; ++y) {
        for (auto x = box.lo.x; x <= box.hi.x; ++x) {
          const VertexId v = grid.id({x, y, z});
          g.ids_.push_back(v);
          g.values_.push_back(grid.value(v));
        }
      }
    }
    const auto ex = box.extent(0);
    const auto ey = box.extent(1);
    auto local_of = [&](const Coord& c) {
      return static_cast<int>((c.x - box.lo.x) + ex * ((c.y - box.lo.y) + ey * (c.z - box.lo.z)));
    };
    g.offsets_.assign(n + 1, 0);
    g.targets_.reserve(n * 14);
    const Dims& dims = grid.dims();
    for (std::size_t i = 0; i < n; ++i) {
      const VertexId v = g.ids_[i];
      for_each_neighbor(dims, v, [&](VertexId u) {
        const Coord c = grid.coord(u);
        if (box.contains(c)) g.targets_.push_back(local_of(c));
      });
      g.offsets_[i + 1] = static_cast<std::int64_t>(g.targets_.size());
    }
    return g;
  }

  /// Graph of explicit edges; duplicate vertices must agree on value.
  static TopologyGraph from_pieces(std::span<const TreePiece* const> pieces) {
    TopologyGraph g;
    std::unordered_map<VertexId, int> local;
    for (const TreePiece* p : pieces) {
      for (std::size_t i = 0; i < p->ids.size(); ++i) {
        auto [it, inserted] = local.try_emplace(p->ids[i], static_cast<int>(g.ids_.size()));
        if (inserted) {
          g.ids_.push_back(p->ids[i]);
          g.values_.push_back(p->values[i]);
        } else if (g.values_[static_cast<std::size_t>(it->second)] != p->values[i]) {
          throw DataError("inconsistent value for shared vertex " + std::to_string(p->ids[i]));
        }
      }
    }
    std::vector<std::pair<int, int>> edges;
    for (const TreePiece* p : pieces) {
      for (auto [a, b] : p->edges) {
        int la = local.at(a);
        int lb = local.at(b);
        if (la > lb) std::swap(la, lb);
        edges.emplace_back(la, lb);
      }
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    g.build_adjacency(edges);
    return g;
  }

 private:
  void build_adjacency(const std::vector<std::pair<int, int>>& edges) {
    const std::size_t n = ids_.size();
    offsets_.assign(n + 1, 0);
    for (auto [a, b] : edges) {
      ++offsets_[static_cast<std::size_t>(a) + 1];
      ++offsets_[static_cast<std::size_t>(b) + 1];
    }
    for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] += offsets_[i];
    targets_.assign(static_cast<std::size_t>(offsets_[n]), 0);
    std::vector<std::int64_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (auto [a, b] : edges) {
      targets_[static_cast<std::size_t>(fill[static_cast<std::size_t>(a)]++)] = b;
      targets_[static_cast<std::size_t>(fill[static_cast<std::size_t>(b)]++)] = a;
    }
  }

  std::vector<VertexId> ids_;
  std::vector<double> values_;
  std::vector<std::int64_t> offsets_;
  std::vector<int> targets_;
};

}  // namespace ctree
