#include <gtest/gtest.h>

#include "ctree/contour_tree.hpp"
#include "ctree/oracle.hpp"

using namespace ctree;

namespace {

ScalarGrid line(std::vector<double> v) {
  const auto n = static_cast<std::int64_t>(v.size());
  return ScalarGrid({n, 1, 1}, std::move(v));
}

}  // namespace

TEST(CountContours, MonotoneLine) {
  const auto g = line({1, 2, 3, 4});
  for (std::int64_t gap = 0; gap < 3; ++gap) EXPECT_EQ(oracle::count_contours(g, gap), 1);
}

TEST(CountContours, HandComputedLine) {
  // Ranks: v0=0, v4=1, v2=2, v1=3, v3=4.
  const auto g = line({0, 5, 2, 6, 1});
  EXPECT_EQ(oracle::count_contours(g, 2), 4);  // 1D: every crossed edge is its own contour
  EXPECT_EQ(oracle::level_set_census(g).contours, (std::vector<std::int64_t>{1, 2, 4, 2}));
}

TEST(CountContours, HandComputedSquare) {
  // 2x2 with the diagonal (0)-(3): the two high corners are separated by it.
  const auto g = ScalarGrid({2, 2, 1}, {0, 5, 6, 1});
  // Ranks: v0=0, v3=1, v1=2, v2=3. Gap 1 separates {0,3} from {1,2}.
  EXPECT_EQ(oracle::count_contours(g, 1), 2);
  // High corners on the diagonal instead: the two low corners are isolated.
  const auto h = ScalarGrid({2, 2, 1}, {5, 0, 1, 6});
  EXPECT_EQ(oracle::count_contours(h, 1), 2);
  EXPECT_EQ(oracle::count_contours(h, 0), 1);
}

TEST(CountContours, RangeChecked) {
  const auto g = line({1, 2, 3});
  EXPECT_THROW(oracle::count_contours(g, -1), UsageError);
  EXPECT_THROW(oracle::count_contours(g, 2), UsageError);
  EXPECT_TRUE(oracle::level_set_census(line({7})).contours.empty());
}

TEST(CountContours, CensusIsPositiveOnConnectedDomain) {
  const auto census = oracle::level_set_census(uniform_random_grid({5, 4, 3}, 2));
  EXPECT_EQ(census.contours.size(), 59u);
  for (auto c : census.contours) EXPECT_GE(c, 1);
}

TEST(CountContours, AgreesWithContourTree) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto g = uniform_random_grid({5, 5, 1}, seed);
    const auto ct = compute_contour_tree(g);
    const auto order = sos_order(g);
    const auto census = oracle::level_set_census(g);
    for (std::size_t gap = 0; gap < census.contours.size(); ++gap) {
      EXPECT_EQ(census.contours[gap], ct.count_straddling(g.key(order.by_rank[gap])));
    }
  }
}

TEST(BruteSubtreeVolume, MonotoneLeafArc) {
  const auto g = monotone_grid({4, 3, 1});
  const auto ct = compute_contour_tree(g);
  EXPECT_EQ(oracle::brute_subtree_volume(ct, ct.find_node(0)), g.size() - 1);
  EXPECT_THROW(oracle::brute_subtree_volume(ct, ct.root), UsageError);
}

TEST(BruteSubtreeVolume, HandComputedLine) {
  const auto ct = compute_contour_tree(line({0, 5, 2, 6, 1}));
  // Root is vertex 3; cutting (2-3) leaves {0,1,2} beyond it.
  EXPECT_EQ(oracle::brute_subtree_volume(ct, ct.find_node(2)), 3);
  EXPECT_EQ(oracle::brute_subtree_volume(ct, ct.find_node(1)), 2);
  EXPECT_EQ(oracle::brute_subtree_volume(ct, ct.find_node(4)), 1);
}

TEST(BruteSubtreeVolume, RequiresAugmentation) {
  const auto g = line({0, 1, 2});
  auto graph = TopologyGraph::from_grid(g, Box::whole(g.dims()));
  const auto ct = combine(compute_join_tree(graph), compute_split_tree(graph));
  EXPECT_THROW(oracle::brute_subtree_volume(ct, 0), UsageError);
}
