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

#ifndef LABREC_EVAL_HPP_
#define LABREC_EVAL_HPP_

// Ranked-retrieval evaluation: seeded splits and folds, AP@k / recall@k,
// test-set scoring, k-fold cross-validation and grid search over (s, metric).

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "labrec/core.hpp"
#include "labrec/recommender.hpp"

namespace labrec {

inline constexpr std::uint64_t kDefaultSeed = 42;

// Seeded Fisher-Yates permutation of [0, m). Built on std::mt19937_64 with
// rejection sampling so the sequence is identical on every platform.
std::vector<std::size_t> seeded_permutation(std::size_t m, std::uint64_t seed);

struct SplitSpec {
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = kDefaultSeed;
};

struct Split {
  std::vector<std::size_t> train;  // ascending bag indices
  std::vector<std::size_t> test;   // ascending bag indices
};

// The first round(m * test_fraction) positions of the seeded permutation form
// the test side. Throws ParameterError when m < 3, the fraction lies outside
// (0, 1), or either side would be empty.
Split train_test_split(std::size_t m, const SplitSpec& spec);

// Seeded fold assignment; fold sizes differ by at most one. Throws
// ParameterError when folds < 2 or m < folds.
std::vector<std::vector<std::size_t>> kfold_indices(std::size_t m,
                                                    std::size_t folds,
                                                    std::uint64_t seed);

template <typename T>
std::vector<T> gather(std::span<const T> values,
                      std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(values[i]);
  return out;
}

// AP@k = (1 / min(|relevant|, k)) * sum over ranks i <= min(k, |recommended|)
// of precision@i at each relevant rank. `relevant` must be sorted. Returns
// nullopt for an empty relevant set.
std::optional<double> average_precision_at_k(
    std::span<const ItemIndex> recommended, std::span<const ItemIndex> relevant,
    std::size_t k);

// |top-k ∩ relevant| / |relevant|; nullopt for an empty relevant set.
std::optional<double> recall_at_k(std::span<const ItemIndex> recommended,
                                  std::span<const ItemIndex> relevant,
                                  std::size_t k);

struct RetrievalMetrics {
  std::size_t k = 0;
  double map = 0.0;
  double mar = 0.0;
  std::size_t queries = 0;  // bags that contributed
  std::size_t skipped = 0;  // bags with no known items
};

// Query = the whole bag, relevant = the same bag, query items not excluded.
// Recommendations are computed once at max(ks) and truncated per k.
std::vector<RetrievalMetrics> evaluate(const FittedModel& model,
                                       std::span<const Bag> eval_bags,
                                       std::span<const std::size_t> ks);
RetrievalMetrics evaluate(const FittedModel& model,
                          std::span<const Bag> eval_bags, std::size_t k);

// Leave-p-out variant: a seeded floor(|bag|/2) of each bag's items is held
// out as the relevant set, the rest is the query, and query items are
// excluded. Bags with fewer than two items are skipped.
std::vector<RetrievalMetrics> evaluate_holdout(const FittedModel& model,
                                               std::span<const Bag> eval_bags,
                                               std::span<const std::size_t> ks,
                                               std::uint64_t seed);

// Maps raw bags onto `vocabulary`, dropping unknown items. Bags may come out
// empty; evaluation skips and counts them.
std::vector<Bag> index_bags_lenient(std::span<const RawBag> raw_bags,
                                    const Vocabulary& vocabulary);

struct CvResult {
  double mean = 0.0;
  std::vector<double> fold_scores;
};

// Mean MAP@scoring_k over seeded folds, fitting on the out-of-fold bags.
CvResult cross_validate(std::span<const Bag> bags, const Vocabulary& vocabulary,
                        const HyperParams& params, std::size_t folds,
                        std::size_t scoring_k, std::uint64_t seed);

struct GridSpec {
  std::vector<std::size_t> s_values = {10, 20, 50, 80, 100};
  std::vector<MetricKind> metrics = {kAllMetrics.begin(), kAllMetrics.end()};
  std::size_t folds = 5;
  std::size_t scoring_k = 5;
  std::uint64_t seed = kDefaultSeed;
  // Worker threads for grid cells; 0 uses the hardware concurrency. Results
  // do not depend on this value.
  unsigned threads = 0;
};

struct GridCell {
  HyperParams params;
  CvResult cv;
};

struct GridResult {
  GridSpec spec;
  std::vector<GridCell> cells;  // metrics-major, in spec order
  HyperParams best;
  double best_score = 0.0;

  const GridCell& cell(MetricKind metric, std::size_t s) const;
};

// Full cross product of s_values x metrics. Best is the argmax of the mean
// score; ties go to the smaller metric name, then the smaller s.
GridResult grid_search(std::span<const Bag> bags, const Vocabulary& vocabulary,
                       const GridSpec& grid);

}  // namespace labrec

#endif  // LABREC_EVAL_HPP_
