#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ctree/errors.hpp"
#include "ctree/graph.hpp"
#include "ctree/grid.hpp"

namespace ctree::dist {

using Splits = std::array<int, 3>;

struct Block {
  int id = 0;
  std::array<int, 3> index{};
  Box box;
};

/// Blocks of a regular grid; neighbours share one vertex plane. Block ids are
/// row-major over block indices, x fastest.
struct BlockDecomposition {
  Dims dims;
  Splits splits{1, 1, 1};
  std::array<std::vector<std::int64_t>, 3> points;  // split points per axis, first 0, last n-1
  std::vector<Block> blocks;

  int block_count() const { return static_cast<int>(blocks.size()); }

  int block_id(const std::array<int, 3>& index) const {
    return index[0] + splits[0] * (index[1] + splits[1] * index[2]);
  }

  /// Lowest block id containing the vertex.
  int owner(const Coord& c) const {
    std::array<int, 3> index{};
    for (int a = 0; a < 3; ++a) {
      const auto& p = points[static_cast<std::size_t>(a)];
      int j = 0;
      while (p[static_cast<std::size_t>(j) + 1] < c[a]) ++j;
      index[static_cast<std::size_t>(a)] = j;
    }
    return block_id(index);
  }
  int owner(VertexId v) const {
    return owner(Coord{v % dims.nx, (v / dims.nx) % dims.ny, v / (dims.nx * dims.ny)});
  }

  /// All blocks containing the vertex, ascending.
  std::vector<int> containing(const Coord& c) const {
    std::array<std::vector<int>, 3> per_axis;
    for (int a = 0; a < 3; ++a) {
      const auto& p = points[static_cast<std::size_t>(a)];
      for (int j = 0; j < splits[static_cast<std::size_t>(a)]; ++j) {
        if (p[static_cast<std::size_t>(j)] <= c[a] && c[a] <= p[static_cast<std::size_t>(j) + 1]) {
          per_axis[static_cast<std::size_t>(a)].push_back(j);
        }
      }
    }
    std::vector<int> out;
    for (int k : per_axis[2]) {
      for (int j : per_axis[1]) {
        for (int i : per_axis[0]) out.push_back(block_id({i, j, k}));
      }
    }
    return out;
  }
};

inline BlockDecomposition decompose(const Dims& dims, const Splits& splits) {
  BlockDecomposition d;
  d.dims = dims;
  d.splits = splits;
  for (int a = 0; a < 3; ++a) {
    const int s = splits[static_cast<std::size_t>(a)];
    const std::int64_t n = dims[a];
    if (s < 1) throw UsageError("block splits must be at least 1");
    if (s > 1 && n - 1 < s) {
      throw UsageError("cannot split extent " + std::to_string(n) + " into " + std::to_string(s) +
                       " blocks of at least 2 vertices");
    }
    auto& p = d.points[static_cast<std::size_t>(a)];
    for (int k = 0; k <= s; ++k) p.push_back(s == 1 ? (k == 0 ? 0 : n - 1) : k * (n - 1) / s);
  }
  for (int k = 0; k < splits[2]; ++k) {
    for (int j = 0; j < splits[1]; ++j) {
      for (int i = 0; i < splits[0]; ++i) {
        Block b;
        b.index = {i, j, k};
        b.id = d.block_id(b.index);
        for (int a = 0; a < 3; ++a) {
          const auto& p = d.points[static_cast<std::size_t>(a)];
          const auto idx = static_cast<std::size_t>(b.index[static_cast<std::size_t>(a)]);
          b.box.lo[a] = p[idx];
          b.box.hi[a] = p[idx + 1];
        }
        d.blocks.push_back(b);
      }
    }
  }
  return d;
}

/// One fan-in step: `sender` hands its boundary tree to `receiver`.
struct Merge {
  int receiver = 0;
  int sender = 0;
};

/// Binary reduction over block ids, halving the largest remaining split
/// dimension first (lowest axis on ties). The receiver is always the lower id.
inline std::vector<std::vector<Merge>> reduction_schedule(const BlockDecomposition& d) {
  std::array<int, 3> groups = d.splits;
  std::array<int, 3> stride{1, 1, 1};  // block-index distance between neighbouring groups
  std::vector<std::vector<Merge>> rounds;
  while (groups[0] * groups[1] * groups[2] > 1) {
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (groups[static_cast<std::size_t>(a)] > groups[static_cast<std::size_t>(axis)]) axis = a;
    }
    const auto ax = static_cast<std::size_t>(axis);
    std::vector<Merge> round;
    for (int k = 0; k < groups[2]; ++k) {
      for (int j = 0; j < groups[1]; ++j) {
        for (int i = 0; i < groups[0]; ++i) {
          std::array<int, 3> g{i, j, k};
          if (g[ax] % 2 != 0 || g[ax] + 1 >= groups[ax]) continue;
          std::array<int, 3> lo{};
          std::array<int, 3> hi{};
          for (std::size_t a = 0; a < 3; ++a) lo[a] = g[a] * stride[a];
          hi = lo;
          hi[ax] += stride[ax];
          round.push_back({d.block_id(lo), d.block_id(hi)});
        }
      }
    }
    rounds.push_back(std::move(round));
    groups[ax] = (groups[ax] + 1) / 2;
    stride[ax] *= 2;
  }
  return rounds;
}

}  // namespace ctree::dist
