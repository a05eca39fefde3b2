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

#ifndef LABREC_RECOMMENDER_HPP_
#define LABREC_RECOMMENDER_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "labrec/core.hpp"
#include "labrec/similarity.hpp"

namespace labrec {

inline constexpr std::size_t kDefaultK = 5;

struct HyperParams {
  std::size_t s = 20;
  MetricKind metric = MetricKind::kJaccard;

  friend bool operator==(const HyperParams&, const HyperParams&) = default;
};

struct ModelProvenance {
  std::string created_at;     // ISO-8601 UTC; set on first save when empty
  std::string source_digest;  // "sha256:<hex>" of the training bag contents
};

// Training state: the bag-item matrix plus everything needed to answer a
// query. Immutable after construction.
class FittedModel {
 public:
  // Throws ParameterError when params.s < 1, DimensionError when the matrix
  // and vocabulary disagree on n.
  FittedModel(BagItemMatrix matrix, Vocabulary vocabulary, HyperParams params,
              ModelProvenance provenance = {});

  const BagItemMatrix& matrix() const noexcept { return matrix_; }
  const Vocabulary& vocabulary() const noexcept { return vocabulary_; }
  const HyperParams& params() const noexcept { return params_; }
  const ModelProvenance& provenance() const noexcept { return provenance_; }
  // Number of training bags containing each item.
  std::span<const std::uint32_t> global_item_frequency() const noexcept {
    return global_frequency_;
  }

 private:
  BagItemMatrix matrix_;
  Vocabulary vocabulary_;
  HyperParams params_;
  ModelProvenance provenance_;
  std::vector<std::uint32_t> global_frequency_;
};

void validate(const HyperParams& params);

// Builds the model; no search happens here. Throws EmptyDataset.
FittedModel fit(std::span<const Bag> bags, const Vocabulary& vocabulary,
                const HyperParams& params);

struct RecommendationEntry {
  Item item;
  std::uint32_t score = 0;  // neighbour bags containing the item

  friend bool operator==(const RecommendationEntry& a,
                         const RecommendationEntry& b) {
    return a.item.index == b.item.index && a.score == b.score;
  }
};

struct RankedRecommendation {
  std::vector<RecommendationEntry> entries;
  std::size_t k_requested = 0;
  std::size_t neighbors_used = 0;
  std::vector<std::string> unknown_items;
};

// Ranks items by how many of the s nearest training bags contain them,
// breaking ties by global training frequency (desc) then vocabulary index.
// Only items with a nonzero neighbour count are returned, at most k.
// Throws EmptyQuery, or ParameterError when k < 1.
RankedRecommendation recommend(const FittedModel& model,
                               std::span<const std::string> query_items,
                               std::size_t k, bool exclude_query_items);

RankedRecommendation recommend(const FittedModel& model, const PackedRow& query,
                               std::size_t k, bool exclude_query_items);

}  // namespace labrec

#endif  // LABREC_RECOMMENDER_HPP_
