#include <gtest/gtest.h>

#include <cmath>

#include "ctree/distributed/lambda.hpp"

namespace {

using namespace ctree;
using namespace ctree::dist;

const double kN2048 = 2048.0 * 2048.0 * 2048.0;

TEST(Lambda, BoundFormula) {
  EXPECT_DOUBLE_EQ(attachment_point_bound(1000, 10, 9), 90.0);
  EXPECT_DOUBLE_EQ(attachment_point_bound(1000, 1, 0), 0.0);
  EXPECT_THROW(attachment_point_bound(1000, 10, -1), UsageError);
}

TEST(Lambda, MemoryExampleGivesFour) {
  EXPECT_EQ(estimate_lambda_min_memory(kN2048, 16, 512e9, 209.02, 133.26 * kGiB), 4);
}

TEST(Lambda, MinimumIsTightAgainstTheBound) {
  const double budget = 512e9 - 133.26 * kGiB;
  const auto l = estimate_lambda_min_memory(kN2048, 16, 512e9, 209.02, 133.26 * kGiB);
  EXPECT_LT(209.02 * attachment_point_bound(kN2048, 16, static_cast<double>(l)), budget);
  EXPECT_GE(209.02 * attachment_point_bound(kN2048, 16, static_cast<double>(l - 1)), budget);
}

TEST(Lambda, HugeBudgetNeedsNoPreSimplification) {
  EXPECT_EQ(estimate_lambda_min_memory(kN2048, 16, 1e18, 209.02, 133.26 * kGiB), 0);
}

TEST(Lambda, InfeasibleBaseMemory) {
  EXPECT_THROW(estimate_lambda_min_memory(kN2048, 16, 100e9, 209.02, 100e9), UsageError);
  EXPECT_THROW(estimate_lambda_min_memory(kN2048, 16, 100e9, 209.02, 200e9), UsageError);
  EXPECT_THROW(estimate_lambda_min_memory(kN2048, 0, 100e9, 209.02, 1e9), UsageError);
}

TEST(Lambda, NonIncreasingInMemory) {
  std::int64_t prev = -1;
  for (double mem = 150.0 * kGiB; mem < 5000.0 * kGiB; mem *= 1.1) {
    const auto l = estimate_lambda_min_memory(kN2048, 16, mem, 209.02, 133.26 * kGiB);
    if (prev >= 0) {
      EXPECT_LE(l, prev) << mem;
    }
    prev = l;
  }
}

TEST(Lambda, BytesPerAttachmentPointFromTwoRuns) {
  const double bytes = estimate_bytes_per_ap(574.66 * kGiB, 697320285, 439.17 * kGiB, 1288810);
  EXPECT_NEAR(bytes, 209.02, 0.5);
}

TEST(Lambda, BytesPerAttachmentPointEdgeCases) {
  EXPECT_DOUBLE_EQ(estimate_bytes_per_ap(1e9, 100, 1e9, 50), 0.0);
  // Points on the line memory = 4000 + 150 * count.
  EXPECT_DOUBLE_EQ(estimate_bytes_per_ap(4000 + 150.0 * 9000, 9000, 4000 + 150.0 * 12, 12), 150.0);
  EXPECT_THROW(estimate_bytes_per_ap(1e9, 100, 2e9, 100), UsageError);
}

TEST(Lambda, CommunicationFloor) {
  EXPECT_EQ(communication_lambda_floor(1e6), 100);
  EXPECT_EQ(communication_lambda_floor(kN2048), 2048);
  EXPECT_EQ(communication_lambda_floor(1e6, 2.5), 250);
  EXPECT_EQ(communication_lambda_floor(1), 1);
  EXPECT_THROW(communication_lambda_floor(0), UsageError);
  EXPECT_THROW(communication_lambda_floor(1e6, 0), UsageError);
}

TEST(Lambda, FloorScalesWithCubeRootOfTwo) {
  for (double n = 1e3; n < 1e15; n *= 7.3) {
    const double a = static_cast<double>(communication_lambda_floor(n));
    const double b = static_cast<double>(communication_lambda_floor(2 * n));
    EXPECT_NEAR(b, a * std::cbrt(2.0), 2.0) << n;
  }
}

TEST(Lambda, AdviceCombinesBothCriteria) {
  const auto a = advise_lambda(kN2048, 16, 512e9, 209.02, 133.26 * kGiB);
  EXPECT_EQ(a.memory_min, estimate_lambda_min_memory(kN2048, 16, 512e9, 209.02, 133.26 * kGiB));
  EXPECT_EQ(a.communication_floor, communication_lambda_floor(kN2048));
  EXPECT_EQ(a.recommended_min, 2048);
}

}  // namespace
