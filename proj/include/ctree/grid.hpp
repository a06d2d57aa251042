#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "ctree/errors.hpp"

namespace ctree {

using VertexId = std::int64_t;
inline constexpr VertexId kNoVertex = -1;

struct Dims {
  std::int64_t nx = 1;
  std::int64_t ny = 1;
  std::int64_t nz = 1;

  std::int64_t size() const { return nx * ny * nz; }
  std::int64_t operator[](int axis) const { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  bool operator==(const Dims&) const = default;
};

struct Coord {
  std::int64_t x = 0;
  std::int64_t y = 0;
  std::int64_t z = 0;

  std::int64_t operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  std::int64_t& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }
  bool operator==(const Coord&) const = default;
};

/// Simulation-of-simplicity key: values compare first, vertex ids break ties.
struct VertexKey {
  double value = -std::numeric_limits<double>::infinity();
  VertexId id = kNoVertex;

  friend bool operator<(const VertexKey& a, const VertexKey& b) {
    return a.value < b.value || (a.value == b.value && a.id < b.id);
  }
  friend bool operator>(const VertexKey& a, const VertexKey& b) { return b < a; }
  friend bool operator==(const VertexKey& a, const VertexKey& b) {
    return a.value == b.value && a.id == b.id;
  }
  friend bool operator!=(const VertexKey& a, const VertexKey& b) { return !(a == b); }
};

inline VertexKey max_key(const VertexKey& a, const VertexKey& b) { return a < b ? b : a; }

// Freudenthal stencil: the 7 positive offsets; negations give the other half.
inline constexpr std::array<std::array<int, 3>, 7> kFreudenthalOffsets{{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}, {1, 1, 1},
}};

/// Regular 2D/3D grid of finite scalars, row-major with x fastest.
class ScalarGrid {
 public:
  ScalarGrid() = default;

  ScalarGrid(Dims dims, std::vector<double> values) : dims_(dims), values_(std::move(values)) {
    if (dims_.nx <= 0 || dims_.ny <= 0 || dims_.nz <= 0) {
      throw UsageError("grid dimensions must be positive");
    }
    if (static_cast<std::int64_t>(values_.size()) != dims_.size()) {
      throw DataError("grid has " + std::to_string(values_.size()) + " values but dims require " +
                      std::to_string(dims_.size()));
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!std::isfinite(values_[i])) {
        throw DataError("non-finite value at linear id " + std::to_string(i));
      }
    }
  }

  const Dims& dims() const { return dims_; }
  std::int64_t size() const { return dims_.size(); }
  const std::vector<double>& values() const { return values_; }
  double value(VertexId v) const { return values_[static_cast<std::size_t>(v)]; }
  VertexKey key(VertexId v) const { return {value(v), v}; }
  bool is_3d() const { return dims_.nz > 1; }

  VertexId id(const Coord& c) const { return c.x + dims_.nx * (c.y + dims_.ny * c.z); }
  Coord coord(VertexId v) const {
    return {v % dims_.nx, (v / dims_.nx) % dims_.ny, v / (dims_.nx * dims_.ny)};
  }
  bool contains(const Coord& c) const {
    return c.x >= 0 && c.y >= 0 && c.z >= 0 && c.x < dims_.nx && c.y < dims_.ny && c.z < dims_.nz;
  }

 private:
  Dims dims_;
  std::vector<double> values_;
};

/// Strict total order on vertices: rank(u) < rank(v) iff key(u) < key(v).
struct VertexOrder {
  std::vector<VertexId> by_rank;     // rank -> vertex
  std::vector<std::int64_t> rank_of; // vertex -> rank

  std::int64_t rank(VertexId v) const { return rank_of[static_cast<std::size_t>(v)]; }
  std::size_t size() const { return by_rank.size(); }
};

inline VertexOrder sos_order(const ScalarGrid& grid) {
  VertexOrder order;
  const auto n = static_cast<std::size_t>(grid.size());
  order.by_rank.resize(n);
  std::iota(order.by_rank.begin(), order.by_rank.end(), VertexId{0});
  std::sort(order.by_rank.begin(), order.by_rank.end(),
            [&](VertexId a, VertexId b) { return grid.key(a) < grid.key(b); });
  order.rank_of.resize(n);
  for (std::size_t r = 0; r < n; ++r) {
    order.rank_of[static_cast<std::size_t>(order.by_rank[r])] = static_cast<std::int64_t>(r);
  }
  return order;
}

/// Calls fn(u) for every Freudenthal neighbour u of v inside the grid.
template <class Fn>
void for_each_neighbor(const Dims& dims, VertexId v, Fn&& fn) {
  const std::int64_t x = v % dims.nx;
  const std::int64_t y = (v / dims.nx) % dims.ny;
  const std::int64_t z = v / (dims.nx * dims.ny);
  for (const auto& o : kFreudenthalOffsets) {
    for (int sign : {1, -1}) {
      const std::int64_t qx = x + sign * o[0];
      const std::int64_t qy = y + sign * o[1];
      const std::int64_t qz = z + sign * o[2];
      if (qx < 0 || qy < 0 || qz < 0 || qx >= dims.nx || qy >= dims.ny || qz >= dims.nz) continue;
      fn(qx + dims.nx * (qy + dims.ny * qz));
    }
  }
}

inline std::vector<VertexId> neighbors(const ScalarGrid& grid, VertexId v) {
  if (v < 0 || v >= grid.size()) {
    throw UsageError("vertex id " + std::to_string(v) + " out of range [0, " +
                     std::to_string(grid.size()) + ")");
  }
  std::vector<VertexId> out;
  out.reserve(14);
  for_each_neighbor(grid.dims(), v, [&](VertexId u) { out.push_back(u); });
  return out;
}

// ---------------------------------------------------------------------------
// Raw binary I/O

enum class ByteOrder { little, big };

namespace detail {

template <class T>
T byteswap_value(T v) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
  std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

inline bool needs_swap(ByteOrder order) {
  return (order == ByteOrder::little) != (std::endian::native == std::endian::little);
}

template <class T>
std::vector<double> decode(const std::vector<char>& buffer, ByteOrder order) {
  std::vector<double> out(buffer.size() / sizeof(T));
  const bool swap = needs_swap(order);
  for (std::size_t i = 0; i < out.size(); ++i) {
    T v;
    std::memcpy(&v, buffer.data() + i * sizeof(T), sizeof(T));
    if (swap) v = byteswap_value(v);
    out[i] = static_cast<double>(v);
  }
  return out;
}

}  // namespace detail

inline ScalarGrid load_raw(const std::filesystem::path& path, Dims dims, int scalar_bits,
                           ByteOrder order) {
  if (scalar_bits != 32 && scalar_bits != 64) {
    throw UsageError("scalar width must be 32 or 64 bits, got " + std::to_string(scalar_bits));
  }
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) throw UsageError("dims must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<char> buffer((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto expected = static_cast<std::uintmax_t>(dims.size()) * (scalar_bits / 8);
  if (buffer.size() != expected) {
    throw DataError("size mismatch for " + path.string() + ": expected " +
                    std::to_string(expected) + " bytes, found " + std::to_string(buffer.size()));
  }
  auto values = scalar_bits == 32 ? detail::decode<float>(buffer, order)
                                  : detail::decode<double>(buffer, order);
  return ScalarGrid(dims, std::move(values));
}

inline void write_raw(const std::filesystem::path& path, const ScalarGrid& grid, int scalar_bits,
                      ByteOrder order) {
  if (scalar_bits != 32 && scalar_bits != 64) throw UsageError("scalar width must be 32 or 64");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const bool swap = detail::needs_swap(order);
  for (double v : grid.values()) {
    if (scalar_bits == 32) {
      auto f = static_cast<float>(v);
      if (swap) f = detail::byteswap_value(f);
      out.write(reinterpret_cast<const char*>(&f), sizeof f);
    } else {
      if (swap) v = detail::byteswap_value(v);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}

// ---------------------------------------------------------------------------
// Synthetic fields

inline ScalarGrid uniform_random_grid(Dims dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> values(static_cast<std::size_t>(dims.size()));
  for (auto& v : values) v = dist(rng);
  return ScalarGrid(dims, std::move(values));
}

/// Small-integer values so that ties (and thus SoS tie-breaking) are frequent.
inline ScalarGrid integer_random_grid(Dims dims, std::uint64_t seed, int levels) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dist(0, levels - 1);
  std::vector<double> values(static_cast<std::size_t>(dims.size()));
  for (auto& v : values) v = dist(rng);
  return ScalarGrid(dims, std::move(values));
}

inline ScalarGrid gaussian_mixture_grid(Dims dims, std::uint64_t seed, int bumps = 8) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  struct Bump {
    double cx, cy, cz, sigma, amplitude;
  };
  std::vector<Bump> list;
  for (int i = 0; i < bumps; ++i) {
    list.push_back({unit(rng) * dims.nx, unit(rng) * dims.ny, unit(rng) * dims.nz,
                    1.0 + unit(rng) * 0.15 * static_cast<double>(std::max({dims.nx, dims.ny, dims.nz})),
                    unit(rng) * 2.0 - 0.5});
  }
  std::vector<double> values(static_cast<std::size_t>(dims.size()));
  for (std::int64_t z = 0; z < dims.nz; ++z) {
    for (std::int64_t y = 0; y < dims.ny; ++y) {
      for (std::int64_t x = 0; x < dims.nx; ++x) {
        double f = 0.0;
        for (const auto& b : list) {
          const double d2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy) + (z - b.cz) * (z - b.cz);
          f += b.amplitude * std::exp(-d2 / (2.0 * b.sigma * b.sigma));
        }
        values[static_cast<std::size_t>(x + dims.nx * (y + dims.ny * z))] = f;
      }
    }
  }
  return ScalarGrid(dims, std::move(values));
}

/// Linear ramp over the row-major index: one minimum, one maximum, one contour per level.
inline ScalarGrid monotone_grid(Dims dims) {
  std::vector<double> values(static_cast<std::size_t>(dims.size()));
  std::iota(values.begin(), values.end(), 0.0);
  return ScalarGrid(dims, std::move(values));
}

}  // namespace ctree
