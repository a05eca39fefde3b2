/*
 * Copyright 2026 The labrec Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LABREC_SIMILARITY_HPP_
#define LABREC_SIMILARITY_HPP_

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "labrec/core.hpp"

namespace labrec {

// Pairwise agreement counts between a query row u and another row v:
// a = both one, b = u one / v zero, c = u zero / v one, d = both zero.
struct ContingencyCounts {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t c = 0;
  std::size_t d = 0;
  std::size_t n = 0;  // a + b + c + d

  friend bool operator==(const ContingencyCounts&,
                         const ContingencyCounts&) = default;
};

enum class MetricKind {
  kJaccard,
  kKulsinski,
  kMatching,
  kRogersTanimoto,
  kRussellRao,
};

inline constexpr std::array<MetricKind, 5> kAllMetrics = {
    MetricKind::kJaccard, MetricKind::kKulsinski, MetricKind::kMatching,
    MetricKind::kRogersTanimoto, MetricKind::kRussellRao};

// Canonical lowercase name.
std::string_view to_string(MetricKind metric);
// Case-insensitive; throws ParameterError listing the valid names.
MetricKind parse_metric(std::string_view name);
std::string metric_names();

// Both rows must share n; padding bits must be zero. Throws DimensionError.
ContingencyCounts contingency(RowView u, RowView v);

// Boolean dissimilarities:
//   jaccard        (b+c)/(a+b+c), 0 when a+b+c = 0
//   kulsinski      (b+c-a+n)/(b+c+n)
//   matching       (b+c)/n
//   rogerstanimoto 2(b+c)/(a+d+2(b+c))
//   russellrao     (n-a)/n
// Every value is a single division of two exact integers, so equal ratios
// compare equal. Throws DimensionError when n = 0.
double dissimilarity(MetricKind metric, const ContingencyCounts& counts);

struct NeighborSet {
  std::vector<std::size_t> indices;
  std::vector<double> distances;  // non-decreasing; ties by ascending index
};

// Exact scan over every row of `matrix`; returns the min(s, m) closest rows.
// Throws ParameterError when s < 1, DimensionError when query.n != matrix n.
NeighborSet nearest_neighbors(const BagItemMatrix& matrix, RowView query,
                              std::size_t s, MetricKind metric);

}  // namespace labrec

#endif  // LABREC_SIMILARITY_HPP_
