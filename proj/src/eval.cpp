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

#include "labrec/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "labrec/error.hpp"

namespace labrec {
namespace {

// Uniform draw in [0, bound) without modulo bias.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % bound;
}

void shuffle(std::vector<std::size_t>& values, std::mt19937_64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(rng, i));
    std::swap(values[i - 1], values[j]);
  }
}

bool contains(std::span<const ItemIndex> sorted, ItemIndex item) {
  return std::binary_search(sorted.begin(), sorted.end(), item);
}

std::vector<ItemIndex> recommended_indices(const RankedRecommendation& rec) {
  std::vector<ItemIndex> out;
  out.reserve(rec.entries.size());
  for (const auto& entry : rec.entries) {
    out.push_back(static_cast<ItemIndex>(entry.item.index));
  }
  return out;
}

struct MetricSums {
  double ap = 0.0;
  double recall = 0.0;
};

// Accumulates per-query AP and recall for every k from one recommendation
// list computed at max(ks).
void add_query(std::span<const ItemIndex> recommended,
                std::span<const ItemIndex> relevant,
                std::span<const std::size_t> ks, std::vector<MetricSums>& sums) {
  for (std::size_t i = 0; i < ks.size(); ++i) {
    sums[i].ap += *average_precision_at_k(recommended, relevant, ks[i]);
    sums[i].recall += *recall_at_k(recommended, relevant, ks[i]);
  }
}

std::vector<RetrievalMetrics> finish(std::span<const std::size_t> ks,
                                     const std::vector<MetricSums>& sums,
                                     std::size_t queries, std::size_t skipped) {
  std::vector<RetrievalMetrics> out;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    RetrievalMetrics metrics;
    metrics.k = ks[i];
    metrics.queries = queries;
    metrics.skipped = skipped;
    if (queries > 0) {
      metrics.map = sums[i].ap / static_cast<double>(queries);
      metrics.mar = sums[i].recall / static_cast<double>(queries);
    }
    out.push_back(metrics);
  }
  return out;
}

std::size_t max_k(std::span<const std::size_t> ks) {
  if (ks.empty()) throw ParameterError("no k values requested");
  const std::size_t k = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1) {
    throw ParameterError("k must be >= 1");
  }
  return k;
}

// Out-of-fold training matrix plus the held-out fold, shared by every grid
// cell.
struct FoldData {
  BagItemMatrix train_matrix;
  std::vector<Bag> held_out;
};

std::vector<FoldData> prepare_folds(std::span<const Bag> bags,
                                    const Vocabulary& vocabulary,
                                    std::size_t folds, std::uint64_t seed) {
  const auto assignment = kfold_indices(bags.size(), folds, seed);
  std::vector<FoldData> out;
  out.reserve(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_idx;
    for (std::size_t g = 0; g < folds; ++g) {
      if (g != f) {
        train_idx.insert(train_idx.end(), assignment[g].begin(),
                         assignment[g].end());
      }
    }
    std::sort(train_idx.begin(), train_idx.end());
    const auto train = gather<Bag>(bags, train_idx);
    out.push_back({build_matrix(train, vocabulary),
                   gather<Bag>(bags, assignment[f])});
  }
  return out;
}

CvResult cross_validate_prepared(std::span<const FoldData> folds,
                                 const Vocabulary& vocabulary,
                                 const HyperParams& params,
                                 std::size_t scoring_k) {
  CvResult result;
  double total = 0.0;
  for (const auto& fold : folds) {
    const FittedModel model(fold.train_matrix, vocabulary, params);
    const double score = evaluate(model, fold.held_out, scoring_k).map;
    result.fold_scores.push_back(score);
    total += score;
  }
  result.mean = total / static_cast<double>(folds.size());
  return result;
}

}  // namespace

std::vector<std::size_t> seeded_permutation(std::size_t m, std::uint64_t seed) {
  std::vector<std::size_t> perm(m);
  for (std::size_t i = 0; i < m; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  shuffle(perm, rng);
  return perm;
}

Split train_test_split(std::size_t m, const SplitSpec& spec) {
  if (m < 3) throw ParameterError(fmt::format("need >= 3 bags to split, got {}", m));
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw ParameterError("test fraction must lie in (0, 1)");
  }
  const auto test_size = static_cast<std::size_t>(
      std::llround(static_cast<double>(m) * spec.test_fraction));
  if (test_size == 0 || test_size == m) {
    throw ParameterError(fmt::format(
        "test fraction {} leaves an empty side for m={}", spec.test_fraction, m));
  }
  const auto perm = seeded_permutation(m, spec.seed);
  Split split;
  split.test.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(test_size));
  split.train.assign(perm.begin() + static_cast<std::ptrdiff_t>(test_size), perm.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

std::vector<std::vector<std::size_t>> kfold_indices(std::size_t m,
                                                    std::size_t folds,
                                                    std::uint64_t seed) {
  if (folds < 2) throw ParameterError("folds must be >= 2");
  if (m < folds) {
    throw ParameterError(fmt::format("{} folds requested over {} bags", folds, m));
  }
  const auto perm = seeded_permutation(m, seed);
  std::vector<std::vector<std::size_t>> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t begin = f * m / folds;
    const std::size_t end = (f + 1) * m / folds;
    out[f].assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
                  perm.begin() + static_cast<std::ptrdiff_t>(end));
    std::sort(out[f].begin(), out[f].end());
  }
  return out;
}

std::optional<double> average_precision_at_k(
    std::span<const ItemIndex> recommended, std::span<const ItemIndex> relevant,
    std::size_t k) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (relevant.empty()) return std::nullopt;
  const std::size_t depth = std::min(k, recommended.size());
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (contains(relevant, recommended[i])) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(relevant.size(), k));
}

std::optional<double> recall_at_k(std::span<const ItemIndex> recommended,
                                  std::span<const ItemIndex> relevant,
                                  std::size_t k) {
  if (k < 1) throw ParameterError("k must be >= 1");
  if (relevant.empty()) return std::nullopt;
  const std::size_t depth = std::min(k, recommended.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < depth; ++i) {
    if (contains(relevant, recommended[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(relevant.size());
}

std::vector<RetrievalMetrics> evaluate(const FittedModel& model,
                                       std::span<const Bag> eval_bags,
                                       std::span<const std::size_t> ks) {
  const std::size_t depth = max_k(ks);
  std::vector<MetricSums> sums(ks.size());
  std::size_t queries = 0;
  std::size_t skipped = 0;
  const std::size_t n = model.vocabulary().size();
  for (const auto& bag : eval_bags) {
    if (bag.item_indices.empty()) {
      ++skipped;
      continue;
    }
    const auto query = PackedRow::from_indices(bag.item_indices, n);
    const auto recommended =
        recommended_indices(recommend(model, query, depth, false));
    add_query(recommended, bag.item_indices, ks, sums);
    ++queries;
  }
  return finish(ks, sums, queries, skipped);
}

RetrievalMetrics evaluate(const FittedModel& model,
                          std::span<const Bag> eval_bags, std::size_t k) {
  const std::size_t ks[] = {k};
  return evaluate(model, eval_bags, ks).front();
}

std::vector<RetrievalMetrics> evaluate_holdout(const FittedModel& model,
                                               std::span<const Bag> eval_bags,
                                               std::span<const std::size_t> ks,
                                               std::uint64_t seed) {
  const std::size_t depth = max_k(ks);
  std::vector<MetricSums> sums(ks.size());
  std::size_t queries = 0;
  std::size_t skipped = 0;
  const std::size_t n = model.vocabulary().size();
  std::mt19937_64 rng(seed);
  for (const auto& bag : eval_bags) {
    const std::size_t size = bag.item_indices.size();
    if (size < 2) {
      ++skipped;
      continue;
    }
    std::vector<std::size_t> order(size);
    for (std::size_t i = 0; i < size; ++i) order[i] = i;
    shuffle(order, rng);
    const std::size_t held = size / 2;
    std::vector<ItemIndex> relevant;
    std::vector<ItemIndex> query_items;
    for (std::size_t i = 0; i < size; ++i) {
      (i < held ? relevant : query_items).push_back(bag.item_indices[order[i]]);
    }
    std::sort(relevant.begin(), relevant.end());
    const auto query = PackedRow::from_indices(query_items, n);
    const auto recommended =
        recommended_indices(recommend(model, query, depth, true));
    add_query(recommended, relevant, ks, sums);
    ++queries;
  }
  return finish(ks, sums, queries, skipped);
}

std::vector<Bag> index_bags_lenient(std::span<const RawBag> raw_bags,
                                    const Vocabulary& vocabulary) {
  std::vector<Bag> bags;
  bags.reserve(raw_bags.size());
  for (const auto& raw : raw_bags) {
    Bag bag{{}, raw.subject_id, raw.charttime};
    for (const auto& id : raw.item_ids) {
      if (auto index = vocabulary.find_id(id)) {
        bag.item_indices.push_back(static_cast<ItemIndex>(*index));
      }
    }
    std::sort(bag.item_indices.begin(), bag.item_indices.end());
    bag.item_indices.erase(
        std::unique(bag.item_indices.begin(), bag.item_indices.end()),
        bag.item_indices.end());
    bags.push_back(std::move(bag));
  }
  return bags;
}

CvResult cross_validate(std::span<const Bag> bags, const Vocabulary& vocabulary,
                        const HyperParams& params, std::size_t folds,
                        std::size_t scoring_k, std::uint64_t seed) {
  validate(params);
  if (scoring_k < 1) throw ParameterError("scoring k must be >= 1");
  const auto prepared = prepare_folds(bags, vocabulary, folds, seed);
  return cross_validate_prepared(prepared, vocabulary, params, scoring_k);
}

const GridCell& GridResult::cell(MetricKind metric, std::size_t s) const {
  for (const auto& c : cells) {
    if (c.params.metric == metric && c.params.s == s) return c;
  }
  throw ParameterError(fmt::format("no grid cell for ({}, s={})",
                                   to_string(metric), s));
}

GridResult grid_search(std::span<const Bag> bags, const Vocabulary& vocabulary,
                       const GridSpec& grid) {
  if (grid.s_values.empty() || grid.metrics.empty()) {
    throw ParameterError("empty parameter grid");
  }
  if (grid.scoring_k < 1) throw ParameterError("scoring k must be >= 1");
  GridResult result;
  result.spec = grid;
  for (MetricKind metric : grid.metrics) {
    for (std::size_t s : grid.s_values) {
      HyperParams params{s, metric};
      validate(params);
      result.cells.push_back({params, {}});
    }
  }

  const auto folds = prepare_folds(bags, vocabulary, grid.folds, grid.seed);
  unsigned workers = grid.threads != 0 ? grid.threads
                                       : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(
      std::min<std::size_t>(workers, result.cells.size()));

  // Each worker writes only into the slot it claimed, so the table does not
  // depend on scheduling.
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> failures(result.cells.size());
  auto run = [&] {
    for (std::size_t i = next++; i < result.cells.size(); i = next++) {
      try {
        result.cells[i].cv = cross_validate_prepared(
            folds, vocabulary, result.cells[i].params, grid.scoring_k);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run);
  }
  for (const auto& failure : failures) {
    if (failure) std::rethrow_exception(failure);
  }

  const GridCell* best = nullptr;
  for (const auto& c : result.cells) {
    if (best == nullptr || c.cv.mean > best->cv.mean ||
        (c.cv.mean == best->cv.mean &&
         std::pair(to_string(c.params.metric), c.params.s) <
             std::pair(to_string(best->params.metric), best->params.s))) {
      best = &c;
    }
  }
  result.best = best->params;
  result.best_score = best->cv.mean;
  return result;
}

}  // namespace labrec
