#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "ctree/errors.hpp"

namespace ctree::dist {

inline constexpr double kGiB = 1024.0 * 1024.0 * 1024.0;

/// Most attachment points a rank can receive when every exchanged interior
/// subtree holds more than lambda vertices.
inline double attachment_point_bound(double total_vertices, double ranks, double lambda) {
  if (total_vertices <= 0 || ranks <= 0) throw UsageError("vertex and rank counts must be positive");
  if (lambda < 0) throw UsageError("lambda must be non-negative");
  return (total_vertices - total_vertices / ranks) / (lambda + 1.0);
}

/// Smallest integer lambda whose worst-case attachment point volume fits in
/// the memory left after the base footprint.
inline std::int64_t estimate_lambda_min_memory(double total_vertices, double ranks, double mem_per_rank,
                                               double bytes_per_ap, double base_mem) {
  if (total_vertices <= 0 || ranks <= 0 || mem_per_rank <= 0 || bytes_per_ap <= 0 || base_mem < 0) {
    throw UsageError("memory estimate inputs must be positive");
  }
  if (base_mem >= mem_per_rank) {
    throw UsageError("base memory alone exceeds the per-rank budget; the configuration is unlikely to be viable");
  }
  const double budget = mem_per_rank - base_mem;
  const double x = bytes_per_ap * (total_vertices - total_vertices / ranks) / budget;
  // The bound needs lambda + 1 > x.
  auto lambda = static_cast<std::int64_t>(std::max(0.0, std::floor(x)));
  auto fits = [&](std::int64_t l) { return bytes_per_ap * attachment_point_bound(total_vertices, ranks, static_cast<double>(l)) < budget; };
  while (lambda > 0 && fits(lambda - 1)) --lambda;
  while (!fits(lambda)) ++lambda;
  return lambda;
}

/// Memory cost of one attachment point from two runs that differ mainly in
/// how many were exchanged.
inline double estimate_bytes_per_ap(double memory_a, double count_a, double memory_b, double count_b) {
  if (count_a == count_b) throw UsageError("attachment point counts of the two runs must differ");
  return (memory_a - memory_b) / (count_a - count_b);
}

/// Lambda at which the attachment point bound N/lambda drops to the N^(2/3)
/// scale of the shared tree.
inline std::int64_t communication_lambda_floor(double total_vertices, double c = 1.0) {
  if (total_vertices < 1) throw UsageError("vertex count must be at least 1");
  if (c <= 0) throw UsageError("scaling constant must be positive");
  const double x = c * std::cbrt(total_vertices);
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, nearest)) return static_cast<std::int64_t>(nearest);
  return static_cast<std::int64_t>(std::ceil(x));
}

struct LambdaAdvice {
  std::int64_t memory_min = 0;
  std::int64_t communication_floor = 0;
  std::int64_t recommended_min = 0;  // lower end of the interval; the upper end is the smallest selected volume
};

inline LambdaAdvice advise_lambda(double total_vertices, double ranks, double mem_per_rank, double bytes_per_ap,
                                  double base_mem, double c = 1.0) {
  LambdaAdvice a;
  a.memory_min = estimate_lambda_min_memory(total_vertices, ranks, mem_per_rank, bytes_per_ap, base_mem);
  a.communication_floor = communication_lambda_floor(total_vertices, c);
  a.recommended_min = std::max(a.memory_min, a.communication_floor);
  return a;
}

}  // namespace ctree::dist
