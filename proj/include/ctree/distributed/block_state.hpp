#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <vector>

#include "ctree/contour_tree.hpp"
#include "ctree/distributed/decomposition.hpp"
#include "ctree/graph.hpp"

namespace ctree::dist {

/// Collapsed mass waiting at a vertex: vertex count and highest key of the
/// interior records attached there.
struct Hanging {
  std::int64_t mass = 0;
  VertexKey peak{};
};

using HangingMap = std::map<VertexId, Hanging>;

inline void add_hanging(HangingMap& map, VertexId v, const Hanging& h) {
  auto& slot = map[v];
  slot.mass += h.mass;
  slot.peak = max_key(slot.peak, h.peak);
}

/// Subtrees stripped off a boundary tree because they touch no block face,
/// grouped by the vertex they hang from. `piece.ids[0]` is the attachment
/// point; the other ids are the record's own vertices.
struct InteriorRecord {
  int owner = 0;
  int index = 0;  // position in the owner's record list
  int level = 0;  // 0 for local trees, k for the k-th fan-in round
  VertexId attachment = kNoVertex;
  std::int64_t measure = 0;  // own vertices plus nested records, attachment excluded
  VertexKey peak{};
  TreePiece piece;

  std::int64_t own_vertices() const { return static_cast<std::int64_t>(piece.ids.size()) - 1; }
};

/// Augmented subtree spanning the face vertices of `box`, with the mass of
/// everything stripped so far hanging from its vertices.
struct BoundaryTree {
  Box box;
  TreePiece piece;
  HangingMap hanging;
};

struct BlockState {
  int rank = 0;
  Box box;
  ContourTree local;
  BoundaryTree boundary;
  std::vector<InteriorRecord> records;
};

/// Keeps the minimal subtree of `ct` containing every vertex on a face of
/// `box`; the rest becomes interior records owned by `owner`. Stripped hanging
/// mass moves into the records, whose own mass then hangs at their attachment.
inline BoundaryTree strip_interior(const ContourTree& ct, const Box& box, const Dims& grid_dims, HangingMap hanging,
                                   int owner, int level, std::vector<InteriorRecord>& records) {
  const std::size_t n = ct.vertex_count();
  const auto adj = detail::adjacency_lists(n, ct.regular_arcs);
  auto coord = [&](VertexId v) {
    return Coord{v % grid_dims.nx, (v / grid_dims.nx) % grid_dims.ny, v / (grid_dims.nx * grid_dims.ny)};
  };

  std::vector<char> anchor(n, 0);
  bool any = false;
  for (std::size_t v = 0; v < n; ++v) {
    anchor[v] = box.on_face(coord(ct.ids[v]), grid_dims);
    any = any || anchor[v];
  }
  if (!any) {
    std::size_t top = 0;
    for (std::size_t v = 1; v < n; ++v) {
      if (ct.key(static_cast<int>(top)) < ct.key(static_cast<int>(v))) top = v;
    }
    anchor[top] = 1;
  }

  std::vector<int> degree(n);
  std::vector<char> removed(n, 0);
  std::deque<int> queue;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = static_cast<int>(adj[v].size());
    if (degree[v] <= 1 && !anchor[v]) queue.push_back(static_cast<int>(v));
  }
  while (!queue.empty()) {
    const auto v = static_cast<std::size_t>(queue.front());
    queue.pop_front();
    if (removed[v]) continue;
    removed[v] = 1;
    for (int u : adj[v]) {
      const auto uu = static_cast<std::size_t>(u);
      if (removed[uu]) continue;
      if (--degree[uu] == 1 && !anchor[uu]) queue.push_back(u);
    }
  }

  BoundaryTree out;
  out.box = box;
  for (std::size_t v = 0; v < n; ++v) {
    if (removed[v]) continue;
    out.piece.ids.push_back(ct.ids[v]);
    out.piece.values.push_back(ct.values[v]);
  }
  for (auto [a, b] : ct.regular_arcs) {
    if (!removed[static_cast<std::size_t>(a)] && !removed[static_cast<std::size_t>(b)]) {
      out.piece.edges.emplace_back(ct.ids[static_cast<std::size_t>(a)], ct.ids[static_cast<std::size_t>(b)]);
    }
  }

  // Flood each stripped component and find the one edge tying it to the kept tree.
  std::map<VertexId, std::size_t> by_attachment;
  std::vector<InteriorRecord> fresh;
  std::vector<char> seen(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    if (!removed[s] || seen[s]) continue;
    std::vector<int> members;
    std::vector<std::pair<int, int>> edges;
    int attach = -1;
    std::vector<int> stack{static_cast<int>(s)};
    seen[s] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (int u : adj[static_cast<std::size_t>(v)]) {
        const auto uu = static_cast<std::size_t>(u);
        if (!removed[uu]) {
          if (attach >= 0 && attach != u) throw InternalError("stripped component has two attachments");
          attach = u;
          edges.emplace_back(v, u);
        } else if (!seen[uu]) {
          seen[uu] = 1;
          stack.push_back(u);
          edges.emplace_back(v, u);
        }
      }
    }
    if (attach < 0) throw InternalError("stripped component is detached from the boundary tree");
    const VertexId a = ct.ids[static_cast<std::size_t>(attach)];
    auto [it, inserted] = by_attachment.try_emplace(a, fresh.size());
    if (inserted) {
      InteriorRecord r;
      r.owner = owner;
      r.level = level;
      r.attachment = a;
      r.piece.ids.push_back(a);
      r.piece.values.push_back(ct.values[static_cast<std::size_t>(attach)]);
      fresh.push_back(std::move(r));
    }
    auto& rec = fresh[it->second];
    for (int v : members) {
      const VertexId id = ct.ids[static_cast<std::size_t>(v)];
      rec.piece.ids.push_back(id);
      rec.piece.values.push_back(ct.values[static_cast<std::size_t>(v)]);
      rec.measure += 1;
      rec.peak = max_key(rec.peak, ct.key(v));
      if (auto h = hanging.find(id); h != hanging.end()) {
        rec.measure += h->second.mass;
        rec.peak = max_key(rec.peak, h->second.peak);
        hanging.erase(h);
      }
    }
    for (auto [x, y] : edges) {
      rec.piece.edges.emplace_back(ct.ids[static_cast<std::size_t>(x)], ct.ids[static_cast<std::size_t>(y)]);
    }
  }
  for (auto& [a, idx] : by_attachment) {
    auto& rec = fresh[idx];
    std::sort(rec.piece.edges.begin(), rec.piece.edges.end());
    add_hanging(hanging, a, {rec.measure, rec.peak});
    rec.index = static_cast<int>(records.size());
    records.push_back(std::move(rec));
  }
  out.hanging = std::move(hanging);
  return out;
}

/// Local contour tree of one block and its first strip.
inline BlockState local_phase(const ScalarGrid& grid, const Block& block) {
  BlockState state;
  state.rank = block.id;
  state.box = block.box;
  state.local = compute_contour_tree(TopologyGraph::from_grid(grid, block.box));
  state.boundary = strip_interior(state.local, block.box, grid.dims(), {}, block.id, 0, state.records);
  return state;
}

/// Fan-in merge on the receiving rank: contour tree of the union of both
/// boundary trees, stripped against the merged box.
inline void merge_boundary(BlockState& receiver, const BoundaryTree& incoming, const Dims& grid_dims, int level) {
  const TreePiece* pieces[] = {&receiver.boundary.piece, &incoming.piece};
  const auto graph = TopologyGraph::from_pieces(pieces);
  const auto ct = compute_contour_tree(graph);
  HangingMap hanging = receiver.boundary.hanging;
  for (const auto& [v, h] : incoming.hanging) add_hanging(hanging, v, h);
  const Box box = Box::hull(receiver.boundary.box, incoming.box);
  receiver.boundary = strip_interior(ct, box, grid_dims, std::move(hanging), receiver.rank, level, receiver.records);
}

}  // namespace ctree::dist
