#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "ctree/contour_tree.hpp"
#include "ctree/oracle.hpp"

using namespace ctree;

namespace {

using ArcSet = std::set<std::pair<VertexId, VertexId>>;

ScalarGrid line(std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return ScalarGrid({n, 1, 1}, std::move(v));
}

ArcSet undirected(const ContourTree& ct) {
  ArcSet out;
  for (auto [a, b] : ct.superarcs()) out.emplace(std::min(a, b), std::max(a, b));
  return out;
}

void expect_matches_oracle(const ScalarGrid& g, const ContourTree& ct, const std::string& label) {
  const auto order = sos_order(g);
  for (std::int64_t gap = 0; gap + 1 < g.size(); ++gap) {
    const VertexKey below = g.key(order.by_rank[static_cast<std::size_t>(gap)]);
    ASSERT_EQ(ct.count_straddling(below), oracle::count_contours(g, gap)) << label << " gap " << gap;
  }
}

void expect_structure(const ScalarGrid& g, const ContourTree& ct) {
  const auto order = sos_order(g);
  ASSERT_TRUE(ct.augmented());
  EXPECT_EQ(ct.regular_arcs.size() + 1, static_cast<std::size_t>(g.size()));
  std::vector<std::int64_t> regular(ct.supernode_count(), 0);
  for (std::size_t v = 0; v < ct.vertex_count(); ++v) {
    const int s = ct.superparent[v];
    if (ct.supernode_index[v] >= 0) {
      EXPECT_EQ(s, ct.supernode_index[v]);
      continue;
    }
    ++regular[static_cast<std::size_t>(s)];
    auto lo = order.rank(ct.node_id(s));
    auto hi = order.rank(ct.node_id(ct.inner[static_cast<std::size_t>(s)]));
    if (lo > hi) std::swap(lo, hi);
    const auto r = order.rank(ct.ids[v]);
    EXPECT_LT(lo, r);
    EXPECT_LT(r, hi);
  }
  std::int64_t total = static_cast<std::int64_t>(ct.supernode_count());
  for (auto c : regular) total += c;
  EXPECT_EQ(total, g.size());
}

}  // namespace

TEST(Combine, LineExample) {
  const auto g = line({0, 5, 2, 6, 1});
  const auto ct = compute_contour_tree(g);
  EXPECT_EQ(ct.supernode_count(), 5u);
  EXPECT_EQ(ct.superarc_count(), 4u);
  EXPECT_EQ(undirected(ct), (ArcSet{{0, 1}, {1, 2}, {2, 3}, {3, 4}}));
  EXPECT_EQ(ct.node_id(ct.root), 3);
  for (std::size_t v = 0; v < 5; ++v) EXPECT_EQ(ct.superparent[v], ct.supernode_index[v]);
  expect_matches_oracle(g, ct, "line");
}

TEST(Combine, MonotoneGrids) {
  for (Dims d : {Dims{4, 1, 1}, Dims{5, 4, 1}, Dims{3, 4, 5}}) {
    const auto g = monotone_grid(d);
    const auto ct = compute_contour_tree(g);
    EXPECT_EQ(ct.supernode_count(), 2u);
    EXPECT_EQ(undirected(ct), (ArcSet{{0, g.size() - 1}}));
    expect_structure(g, ct);
  }
}

TEST(Augment, MonotoneLine) {
  const auto ct = compute_contour_tree(line({1, 2, 3, 4}));
  const int arc = ct.find_node(0);
  EXPECT_EQ(ct.inner[static_cast<std::size_t>(arc)], ct.find_node(3));
  EXPECT_EQ(ct.superparent[1], arc);
  EXPECT_EQ(ct.superparent[2], arc);
  EXPECT_EQ(ct.superparent[0], ct.find_node(0));
  EXPECT_EQ(ct.superparent[3], ct.find_node(3));
}

TEST(Augment, RegularCountsSumToN) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto g = uniform_random_grid({8, 8, 1}, seed);
    expect_structure(g, compute_contour_tree(g));
  }
}

TEST(Combine, SingleVertex) {
  const auto g = line({3.5});
  const auto ct = compute_contour_tree(g);
  EXPECT_EQ(ct.supernode_count(), 1u);
  EXPECT_EQ(ct.superarc_count(), 0u);
  EXPECT_EQ(ct.root, 0);
  EXPECT_TRUE(ct.augmented());
}

TEST(Combine, RejectsMismatchedTrees) {
  const auto a = TopologyGraph::from_grid(line({1, 2, 3}), Box::whole({3, 1, 1}));
  const auto b = TopologyGraph::from_grid(line({1, 2}), Box::whole({2, 1, 1}));
  EXPECT_THROW(combine(compute_join_tree(a), compute_split_tree(b)), UsageError);
  EXPECT_THROW(combine(compute_join_tree(a), compute_join_tree(a)), UsageError);
}

TEST(Combine, OracleRandom2DAnd3D) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto g = seed % 2 ? uniform_random_grid({6, 6, 1}, seed) : uniform_random_grid({4, 4, 4}, seed);
    const auto ct = compute_contour_tree(g);
    expect_matches_oracle(g, ct, "seed " + std::to_string(seed));
    expect_structure(g, ct);
  }
}

TEST(Combine, OracleWithTies) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = integer_random_grid({6, 6, 4}, seed, 4);
    expect_matches_oracle(g, compute_contour_tree(g), "tie seed " + std::to_string(seed));
  }
}

TEST(Combine, WStructure) {
  // Alternating extrema: a zig-zag of saddles on one long chain.
  const auto g = ScalarGrid({7, 2, 1}, {0, 9, 1, 8, 2, 7, 3,
                                         0.5, 9.5, 1.5, 8.5, 2.5, 7.5, 3.5});
  const auto ct = compute_contour_tree(g);
  expect_matches_oracle(g, ct, "w");
  expect_structure(g, ct);
}

TEST(Combine, LeavesAreLocalExtrema) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = seed % 2 ? uniform_random_grid({7, 5, 1}, seed) : uniform_random_grid({4, 4, 3}, seed);
    const auto ct = compute_contour_tree(g);
    std::vector<int> degree(ct.supernode_count(), 0);
    for (std::size_t s = 0; s < ct.supernode_count(); ++s) {
      if (ct.inner[s] < 0) continue;
      ++degree[s];
      ++degree[static_cast<std::size_t>(ct.inner[s])];
    }
    for (VertexId v = 0; v < g.size(); ++v) {
      bool higher = false;
      bool lower = false;
      for (VertexId u : neighbors(g, v)) (g.key(u) > g.key(v) ? higher : lower) = true;
      const int s = ct.find_node(v);
      const bool leaf = s >= 0 && degree[static_cast<std::size_t>(s)] == 1;
      EXPECT_EQ(leaf, !(higher && lower)) << "seed " << seed << " v " << v;
    }
  }
}

TEST(Combine, Deterministic) {
  const auto g = uniform_random_grid({9, 7, 3}, 5);
  std::ostringstream a;
  std::ostringstream b;
  dump(compute_contour_tree(g), a);
  dump(compute_contour_tree(g), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Dump, Format) {
  std::ostringstream os;
  dump(compute_contour_tree(line({1, 2.5, 3, 4})), os);
  EXPECT_EQ(os.str(), "supernodes 2\n0 1 0\n3 4 3\nsuperarcs 1\n0 -> 3\n");
}

TEST(Piece, RoundTrip) {
  const auto g = uniform_random_grid({5, 5, 2}, 9);
  const auto ct = compute_contour_tree(g);
  const auto back = contour_tree_from_piece(to_piece(ct));
  EXPECT_EQ(back.superarcs(), ct.superarcs());
  EXPECT_EQ(back.superparent, ct.superparent);
}

TEST(Piece, AvoidRoot) {
  const auto g = line({0, 5, 2, 6, 1});
  std::vector<char> avoid(5, 0);
  avoid[3] = 1;
  const auto ct = contour_tree_from_piece(to_piece(compute_contour_tree(g)), avoid);
  EXPECT_EQ(ct.node_id(ct.root), 1);
}
