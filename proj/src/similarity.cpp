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

#include "labrec/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <utility>

#include <fmt/format.h>

#include "labrec/error.hpp"

namespace labrec {
namespace {

std::size_t popcount_words(std::span<const Word> words) {
  std::size_t total = 0;
  for (Word w : words) total += static_cast<std::size_t>(std::popcount(w));
  return total;
}

std::size_t popcount_and(const Word* u, const Word* v, std::size_t words) {
  std::size_t total = 0;
  for (std::size_t i = 0; i < words; ++i) {
    total += static_cast<std::size_t>(std::popcount(u[i] & v[i]));
  }
  return total;
}

// Contingency from the shared count and both row cardinalities.
ContingencyCounts counts_from(std::size_t both, std::size_t u_ones,
                              std::size_t v_ones, std::size_t n) {
  ContingencyCounts k;
  k.a = both;
  k.b = u_ones - both;
  k.c = v_ones - both;
  k.d = n - k.a - k.b - k.c;
  k.n = n;
  return k;
}

double ratio(std::size_t numerator, std::size_t denominator) {
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

std::string_view to_string(MetricKind metric) {
  switch (metric) {
    case MetricKind::kJaccard:
      return "jaccard";
    case MetricKind::kKulsinski:
      return "kulsinski";
    case MetricKind::kMatching:
      return "matching";
    case MetricKind::kRogersTanimoto:
      return "rogerstanimoto";
    case MetricKind::kRussellRao:
      return "russellrao";
  }
  return "?";
}

std::string metric_names() {
  std::string out;
  for (MetricKind m : kAllMetrics) {
    if (!out.empty()) out += ", ";
    out += to_string(m);
  }
  return out;
}

MetricKind parse_metric(std::string_view name) {
  std::string folded(name);
  for (char& c : folded) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  for (MetricKind m : kAllMetrics) {
    if (to_string(m) == folded) return m;
  }
  throw ParameterError(fmt::format("unknown metric '{}' (valid: {})", name,
                                   metric_names()));
}

ContingencyCounts contingency(RowView u, RowView v) {
  if (u.n != v.n || u.words.size() != v.words.size()) {
    throw DimensionError(
        fmt::format("row length mismatch: {} vs {}", u.n, v.n));
  }
  const std::size_t both =
      popcount_and(u.words.data(), v.words.data(), u.words.size());
  return counts_from(both, popcount_words(u.words), popcount_words(v.words),
                     u.n);
}

double dissimilarity(MetricKind metric, const ContingencyCounts& k) {
  if (k.n == 0) throw DimensionError("dissimilarity over zero columns");
  const std::size_t mismatches = k.b + k.c;
  switch (metric) {
    case MetricKind::kJaccard: {
      const std::size_t union_size = k.a + mismatches;
      return union_size == 0 ? 0.0 : ratio(mismatches, union_size);
    }
    case MetricKind::kKulsinski:
      return ratio(mismatches - k.a + k.n, mismatches + k.n);
    case MetricKind::kMatching:
      return ratio(mismatches, k.n);
    case MetricKind::kRogersTanimoto:
      return ratio(2 * mismatches, k.a + k.d + 2 * mismatches);
    case MetricKind::kRussellRao:
      return ratio(k.n - k.a, k.n);
  }
  return 0.0;
}

NeighborSet nearest_neighbors(const BagItemMatrix& matrix, RowView query,
                              std::size_t s, MetricKind metric) {
  if (s < 1) throw ParameterError("s must be >= 1");
  if (query.n != matrix.cols()) {
    throw DimensionError(fmt::format("query has {} columns, matrix has {}",
                                     query.n, matrix.cols()));
  }
  const std::size_t m = matrix.rows();
  const std::size_t words = matrix.words_per_row();
  const std::size_t query_ones = popcount_words(query.words);

  std::vector<std::pair<double, std::size_t>> scored(m);
  for (std::size_t u = 0; u < m; ++u) {
    const std::size_t both =
        popcount_and(query.words.data(), matrix.row(u).words.data(), words);
    scored[u] = {dissimilarity(metric, counts_from(both, query_ones,
                                                   matrix.popcount(u),
                                                   matrix.cols())),
                 u};
  }
  const std::size_t keep = std::min(s, m);
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end());

  NeighborSet result;
  result.indices.reserve(keep);
  result.distances.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    result.distances.push_back(scored[i].first);
    result.indices.push_back(scored[i].second);
  }
  return result;
}

}  // namespace labrec
