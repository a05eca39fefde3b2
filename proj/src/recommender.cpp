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

#include "labrec/recommender.hpp"

#include <algorithm>
#include <bit>

#include <fmt/format.h>

#include "labrec/digest.hpp"
#include "labrec/error.hpp"

namespace labrec {
namespace {

std::string training_digest(const BagItemMatrix& matrix,
                            const Vocabulary& vocabulary) {
  std::string canonical;
  for (std::size_t u = 0; u < matrix.rows(); ++u) {
    bool first = true;
    for (ItemIndex j : matrix.row_indices(u)) {
      if (!first) canonical.push_back(',');
      canonical += vocabulary[j].item_id;
      first = false;
    }
    canonical.push_back('\n');
  }
  return "sha256:" + sha256_hex(canonical);
}

}  // namespace

void validate(const HyperParams& params) {
  if (params.s < 1) throw ParameterError("s must be >= 1");
}

FittedModel::FittedModel(BagItemMatrix matrix, Vocabulary vocabulary,
                         HyperParams params, ModelProvenance provenance)
    : matrix_(std::move(matrix)),
      vocabulary_(std::move(vocabulary)),
      params_(params),
      provenance_(std::move(provenance)),
      global_frequency_(vocabulary_.size(), 0) {
  validate(params_);
  if (matrix_.cols() != vocabulary_.size()) {
    throw DimensionError(fmt::format("matrix has {} columns, vocabulary {} items",
                                     matrix_.cols(), vocabulary_.size()));
  }
  for (std::size_t u = 0; u < matrix_.rows(); ++u) {
    for (ItemIndex j : matrix_.row_indices(u)) ++global_frequency_[j];
  }
  if (provenance_.source_digest.empty()) {
    provenance_.source_digest = training_digest(matrix_, vocabulary_);
  }
}

FittedModel fit(std::span<const Bag> bags, const Vocabulary& vocabulary,
                const HyperParams& params) {
  validate(params);
  if (bags.empty()) throw EmptyDataset("no training bags");
  return FittedModel(build_matrix(bags, vocabulary), vocabulary, params);
}

RankedRecommendation recommend(const FittedModel& model, const PackedRow& query,
                               std::size_t k, bool exclude_query_items) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (query.count() == 0) throw EmptyQuery("query has no items");
  const auto& matrix = model.matrix();
  const NeighborSet neighbors = nearest_neighbors(
      matrix, query.view(), model.params().s, model.params().metric);

  std::vector<std::uint32_t> counts(matrix.cols(), 0);
  for (std::size_t u : neighbors.indices) {
    const auto words = matrix.row(u).words;
    for (std::size_t w = 0; w < words.size(); ++w) {
      for (Word bits = words[w]; bits != 0; bits &= bits - 1) {
        ++counts[w * kWordBits + static_cast<std::size_t>(std::countr_zero(bits))];
      }
    }
  }
  if (exclude_query_items) {
    for (ItemIndex j : query.indices()) counts[j] = 0;
  }

  std::vector<ItemIndex> candidates;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    if (counts[j] > 0) candidates.push_back(static_cast<ItemIndex>(j));
  }
  const auto global = model.global_item_frequency();
  auto ranks_before = [&](ItemIndex x, ItemIndex y) {
    if (counts[x] != counts[y]) return counts[x] > counts[y];
    if (global[x] != global[y]) return global[x] > global[y];
    return x < y;
  };
  const std::size_t keep = std::min(k, candidates.size());
  std::partial_sort(candidates.begin(),
                    candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                    candidates.end(), ranks_before);

  RankedRecommendation result;
  result.k_requested = k;
  result.neighbors_used = neighbors.indices.size();
  result.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const ItemIndex j = candidates[i];
    result.entries.push_back({model.vocabulary()[j], counts[j]});
  }
  return result;
}

RankedRecommendation recommend(const FittedModel& model,
                               std::span<const std::string> query_items,
                               std::size_t k, bool exclude_query_items) {
  if (k < 1) throw ParameterError("k must be >= 1");
  EncodedQuery encoded = encode_query(query_items, model.vocabulary());
  RankedRecommendation result =
      recommend(model, encoded.row, k, exclude_query_items);
  result.unknown_items = std::move(encoded.unknown_items);
  return result;
}

}  // namespace labrec
