#include <gtest/gtest.h>

#include <set>

#include "ctree/merge_tree.hpp"

using namespace ctree;

namespace {

using ArcSet = std::vector<std::pair<VertexId, VertexId>>;

ScalarGrid line(std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return ScalarGrid({n, 1, 1}, std::move(v));
}

// Components of {v : rank(v) > gap} (above) or {rank(v) <= gap} (below) by flood fill.
std::int64_t level_components(const ScalarGrid& g, const VertexOrder& order, std::int64_t gap, bool above) {
  const auto n = static_cast<std::size_t>(g.size());
  auto inside = [&](VertexId v) { return (order.rank(v) > gap) == above; };
  std::vector<char> seen(n, 0);
  std::int64_t count = 0;
  for (VertexId s = 0; s < g.size(); ++s) {
    if (!inside(s) || seen[static_cast<std::size_t>(s)]) continue;
    ++count;
    std::vector<VertexId> stack{s};
    seen[static_cast<std::size_t>(s)] = 1;
    while (!stack.empty()) {
      const VertexId v = stack.back();
      stack.pop_back();
      for (VertexId u : neighbors(g, v)) {
        if (inside(u) && !seen[static_cast<std::size_t>(u)]) {
          seen[static_cast<std::size_t>(u)] = 1;
          stack.push_back(u);
        }
      }
    }
  }
  return count;
}

std::int64_t straddling(const ArcSet& arcs, const VertexOrder& order, std::int64_t gap) {
  std::int64_t c = 0;
  for (auto [a, b] : arcs) {
    auto ra = order.rank(a);
    auto rb = order.rank(b);
    if (ra > rb) std::swap(ra, rb);
    if (ra <= gap && rb > gap) ++c;
  }
  return c;
}

void expect_tree_and_monotone(const MergeTree& t, const VertexOrder& order) {
  const std::size_t n = t.size();
  std::size_t roots = 0;
  std::vector<std::vector<int>> adj(n);
  for (std::size_t v = 0; v < n; ++v) {
    const int to = t.arc_to[v];
    if (to < 0) {
      ++roots;
      continue;
    }
    const auto rv = order.rank(t.ids[v]);
    const auto rt = order.rank(t.ids[static_cast<std::size_t>(to)]);
    if (t.direction == SweepDirection::join) {
      EXPECT_LT(rt, rv);
    } else {
      EXPECT_GT(rt, rv);
    }
    adj[v].push_back(to);
    adj[static_cast<std::size_t>(to)].push_back(static_cast<int>(v));
  }
  EXPECT_EQ(roots, 1u);
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    ++reached;
    for (int u : adj[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        stack.push_back(u);
      }
    }
  }
  EXPECT_EQ(reached, n);
}

}  // namespace

TEST(JoinTree, LineExample) {
  const auto g = line({0, 5, 2, 6, 1});
  const auto t = compute_join_tree(g, sos_order(g));
  EXPECT_EQ(t.superarcs(), (ArcSet{{1, 2}, {2, 0}, {3, 2}}));
  EXPECT_EQ(t.arc_to[2], 4);
  EXPECT_EQ(t.arc_to[4], 0);
  const auto sn = t.supernodes();
  EXPECT_EQ(std::count(sn.begin(), sn.end(), 4), 0);
}

TEST(JoinTree, Monotone) {
  const auto g = line({1, 2, 3, 4});
  const auto t = compute_join_tree(g, sos_order(g));
  EXPECT_EQ(t.superarcs(), (ArcSet{{3, 0}}));
  EXPECT_EQ(t.supernodes(), (std::vector<int>{0, 3}));
}

TEST(SplitTree, LineExample) {
  const auto g = line({0, 5, 2, 6, 1});
  const auto t = compute_split_tree(g, sos_order(g));
  EXPECT_EQ(t.superarcs(), (ArcSet{{0, 1}, {1, 3}, {2, 1}, {4, 3}}));
}

TEST(SplitTree, Monotone) {
  const auto g = line({1, 2, 3, 4});
  EXPECT_EQ(compute_split_tree(g, sos_order(g)).superarcs(), (ArcSet{{0, 3}}));
}

TEST(MergeTree, RejectsMismatchedOrder) {
  const auto g = line({1, 2, 3});
  const auto other = sos_order(line({1, 2}));
  EXPECT_THROW(compute_join_tree(g, other), UsageError);
}

TEST(MergeTree, LeavesAreLocalExtrema) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto g = seed % 2 ? uniform_random_grid({7, 6, 1}, seed) : integer_random_grid({4, 4, 3}, seed, 5);
    const auto order = sos_order(g);
    const auto join = compute_join_tree(g, order);
    const auto split = compute_split_tree(g, order);
    const auto jc = join.child_counts();
    const auto sc = split.child_counts();
    for (VertexId v = 0; v < g.size(); ++v) {
      bool has_higher = false;
      bool has_lower = false;
      for (VertexId u : neighbors(g, v)) {
        (order.rank(u) > order.rank(v) ? has_higher : has_lower) = true;
      }
      EXPECT_EQ(jc[static_cast<std::size_t>(v)] == 0, !has_higher) << "seed " << seed << " v " << v;
      EXPECT_EQ(sc[static_cast<std::size_t>(v)] == 0, !has_lower) << "seed " << seed << " v " << v;
    }
  }
}

TEST(MergeTree, TreeAndMonotonicity) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = integer_random_grid({5, 4, 3}, seed, 4);
    const auto order = sos_order(g);
    expect_tree_and_monotone(compute_join_tree(g, order), order);
    expect_tree_and_monotone(compute_split_tree(g, order), order);
  }
}

TEST(MergeTree, DualityUnderNegation) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto g = uniform_random_grid({6, 6, 1}, 100 + seed);
    std::vector<double> neg(g.values());
    for (auto& v : neg) v = -v;
    const ScalarGrid ng(g.dims(), neg);
    const auto split = compute_split_tree(g, sos_order(g));
    const auto join = compute_join_tree(ng, sos_order(ng));
    EXPECT_EQ(split.arc_to, join.arc_to) << "seed " << seed;
  }
}

TEST(MergeTree, StraddlingMatchesLevelSetComponents) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = seed % 2 ? uniform_random_grid({6, 5, 1}, seed) : integer_random_grid({4, 3, 3}, seed, 3);
    const auto order = sos_order(g);
    const auto join = compute_join_tree(g, order).superarcs();
    const auto split = compute_split_tree(g, order).superarcs();
    for (std::int64_t gap = 0; gap + 1 < g.size(); ++gap) {
      EXPECT_EQ(straddling(join, order, gap), level_components(g, order, gap, true));
      EXPECT_EQ(straddling(split, order, gap), level_components(g, order, gap, false));
    }
  }
}
