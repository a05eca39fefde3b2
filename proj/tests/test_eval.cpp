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

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include <doctest.h>

#include "labrec/error.hpp"
#include "labrec/eval.hpp"
#include "labrec/ingest.hpp"
#include "labrec/report.hpp"
#include "synthetic_labs.hpp"

using namespace labrec;

namespace {

// Direct transcription of AP@k: walk the list, collect precision@i at each
// relevant rank, divide by min(|rel|, k).
double naive_ap(const std::vector<ItemIndex>& rec, const std::vector<ItemIndex>& rel,
                std::size_t k) {
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rec.size() && i < k; ++i) {
    if (std::find(rel.begin(), rel.end(), rec[i]) != rel.end()) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(std::min(rel.size(), k));
}

double naive_recall(const std::vector<ItemIndex>& rec,
                    const std::vector<ItemIndex>& rel, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rec.size() && i < k; ++i) {
    hits += std::find(rel.begin(), rel.end(), rec[i]) != rel.end();
  }
  return static_cast<double>(hits) / static_cast<double>(rel.size());
}

Vocabulary letters(std::size_t n) {
  std::vector<ItemSpec> specs;
  for (std::size_t j = 0; j < n; ++j) specs.push_back({std::string(1, char('A' + j)), ""});
  return Vocabulary(specs);
}

struct Dataset {
  Vocabulary vocabulary;
  std::vector<Bag> bags;
};

Dataset synthetic_dataset(int patients) {
  testing::SyntheticSpec spec;
  spec.patients = patients;
  std::istringstream in(testing::synthetic_labevents_csv(spec));
  const auto raw = extract_bags(parse_labevents(in).rows);
  Vocabulary vocab = build_vocabulary(raw);
  auto bags = index_bags(raw, vocab);
  return {std::move(vocab), std::move(bags)};
}

}  // namespace

TEST_CASE("train_test_split sizes") {
  const auto split = train_test_split(1596, {});
  CHECK(split.test.size() == 532);
  CHECK(split.train.size() == 1064);
  CHECK(std::is_sorted(split.train.begin(), split.train.end()));
  CHECK(std::is_sorted(split.test.begin(), split.test.end()));

  std::vector<std::size_t> all(split.train);
  all.insert(all.end(), split.test.begin(), split.test.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) REQUIRE(all[i] == i);

  const auto half = train_test_split(4, {0.5, 42});
  CHECK(half.train.size() == 2);
  CHECK(half.test.size() == 2);
}

TEST_CASE("train_test_split is seeded") {
  const auto a = train_test_split(100, {1.0 / 3.0, 42});
  const auto b = train_test_split(100, {1.0 / 3.0, 42});
  const auto c = train_test_split(100, {1.0 / 3.0, 43});
  CHECK(a.test == b.test);
  CHECK(a.test != c.test);
}

TEST_CASE("train_test_split errors") {
  CHECK_THROWS_AS(train_test_split(2, {}), ParameterError);
  CHECK_THROWS_AS(train_test_split(10, {0.0, 1}), ParameterError);
  CHECK_THROWS_AS(train_test_split(10, {1.0, 1}), ParameterError);
  CHECK_THROWS_AS(train_test_split(3, {0.01, 1}), ParameterError);
}

TEST_CASE("seeded_permutation is a permutation with a frozen prefix") {
  const auto perm = seeded_permutation(10, 42);
  std::vector<std::size_t> sorted(perm);
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 10; ++i) CHECK(sorted[i] == i);
  CHECK(seeded_permutation(10, 42) == perm);
  CHECK(seeded_permutation(0, 42).empty());
}

TEST_CASE("kfold_indices partitions with balanced folds") {
  for (std::size_t m : {5u, 17u, 100u}) {
    for (std::size_t folds : {2u, 3u, 5u}) {
      const auto f = kfold_indices(m, folds, 42);
      REQUIRE(f.size() == folds);
      std::size_t lo = m, hi = 0;
      std::set<std::size_t> seen;
      for (const auto& fold : f) {
        lo = std::min(lo, fold.size());
        hi = std::max(hi, fold.size());
        seen.insert(fold.begin(), fold.end());
      }
      CHECK(hi - lo <= 1);
      CHECK(seen.size() == m);
    }
  }
  CHECK_THROWS_AS(kfold_indices(3, 5, 42), ParameterError);
  CHECK_THROWS_AS(kfold_indices(10, 1, 42), ParameterError);
}

TEST_CASE("AP@k and recall@k on hand examples") {
  // A=0, B=1, C=2, D=3, E=4.
  const std::vector<ItemIndex> rec = {0, 2, 1};
  const std::vector<ItemIndex> rel_ab = {0, 1};
  CHECK(*average_precision_at_k(rec, rel_ab, 3) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  const std::vector<ItemIndex> rel_abde = {0, 1, 3, 4};
  CHECK(*recall_at_k(rec, rel_abde, 3) == 0.5);
  CHECK(*average_precision_at_k(rec, rel_ab, 1) == 1.0);
  CHECK_FALSE(average_precision_at_k(rec, std::vector<ItemIndex>{}, 3).has_value());
  CHECK_FALSE(recall_at_k(rec, std::vector<ItemIndex>{}, 3).has_value());
  CHECK(*average_precision_at_k(std::vector<ItemIndex>{}, rel_ab, 3) == 0.0);
  CHECK_THROWS_AS(average_precision_at_k(rec, rel_ab, 0), ParameterError);
  CHECK_THROWS_AS(recall_at_k(rec, rel_ab, 0), ParameterError);
}

TEST_CASE("property: AP@k and recall@k match the reference") {
  std::mt19937_64 rng(5150);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 30;
    std::vector<ItemIndex> universe(n);
    for (std::size_t j = 0; j < n; ++j) universe[j] = static_cast<ItemIndex>(j);
    std::shuffle(universe.begin(), universe.end(), rng);
    const std::vector<ItemIndex> rec(universe.begin(),
                                     universe.begin() + rng() % (n + 1));
    std::set<ItemIndex> rel_set;
    const std::size_t rel_size = 1 + rng() % n;
    while (rel_set.size() < rel_size) rel_set.insert(static_cast<ItemIndex>(rng() % n));
    const std::vector<ItemIndex> rel(rel_set.begin(), rel_set.end());
    const std::size_t k = 1 + rng() % 12;

    const double ap = *average_precision_at_k(rec, rel, k);
    CHECK(std::abs(ap - naive_ap(rec, rel, k)) <= 1e-12);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
    CHECK(*recall_at_k(rec, rel, k) == doctest::Approx(naive_recall(rec, rel, k)));
    CHECK(*recall_at_k(rec, rel, k) <= *recall_at_k(rec, rel, k + 1));
  }
}

TEST_CASE("MAP and MAR average over evaluation bags") {
  // Training bags {A,B} and {C,D}; s = 1.
  const Vocabulary vocab = letters(4);
  const std::vector<Bag> train = {{{0, 1}, "P", "t"}, {{2, 3}, "P", "u"}};
  const FittedModel model = fit(train, vocab, {1, MetricKind::kJaccard});

  SUBCASE("a single query reduces to its AP") {
    const std::vector<Bag> eval = {{{0, 1}, "Q", "t"}};
    const auto r = evaluate(model, eval, 2);
    CHECK(r.map == 1.0);
    CHECK(r.mar == 1.0);
    CHECK(r.queries == 1);
  }
  SUBCASE("two queries with AP 1 and 1/2") {
    // {A,C} ties between both training bags; the lower index wins, so the
    // list is [A, B] and AP@2 = (1/1) / 2.
    const std::vector<Bag> eval = {{{0, 1}, "Q", "t"}, {{0, 2}, "Q", "u"}};
    const auto r = evaluate(model, eval, 2);
    CHECK(r.map == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.mar == doctest::Approx(0.75).epsilon(1e-15));
  }
  SUBCASE("empty bags are skipped and counted") {
    const std::vector<Bag> eval = {{{0, 1}, "Q", "t"}, {{}, "Q", "u"}};
    const auto r = evaluate(model, eval, 2);
    CHECK(r.queries == 1);
    CHECK(r.skipped == 1);
    CHECK(r.map == 1.0);
  }
}

TEST_CASE("a self-trained model with s = 1 is perfect") {
  const Vocabulary vocab = letters(5);
  const std::vector<Bag> bags = {{{0, 1}, "P", "t"}, {{2, 3}, "P", "u"}, {{4}, "P", "v"}};
  const FittedModel model = fit(bags, vocab, {1, MetricKind::kJaccard});
  const std::vector<std::size_t> ks = {1, 5, 10};
  for (const auto& r : evaluate(model, bags, ks)) {
    CHECK(r.map == 1.0);
    CHECK(r.queries == 3);
  }
}

TEST_CASE("evaluate at several k equals separate runs") {
  const auto data = synthetic_dataset(25);
  const FittedModel model = fit(data.bags, data.vocabulary, {10, MetricKind::kJaccard});
  const std::vector<std::size_t> ks = {3, 5, 10};
  const auto joint = evaluate(model, data.bags, ks);
  REQUIRE(joint.size() == 3);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto single = evaluate(model, data.bags, ks[i]);
    CHECK(joint[i].k == ks[i]);
    CHECK(joint[i].map == single.map);
    CHECK(joint[i].mar == single.mar);
  }
  CHECK(joint[0].mar <= joint[1].mar);
  CHECK(joint[1].mar <= joint[2].mar);
  CHECK_THROWS_AS(evaluate(model, data.bags, std::vector<std::size_t>{}), ParameterError);
}

TEST_CASE("evaluate_holdout") {
  const auto data = synthetic_dataset(20);
  const FittedModel model = fit(data.bags, data.vocabulary, {10, MetricKind::kJaccard});
  const std::vector<std::size_t> ks = {3, 5};
  const auto a = evaluate_holdout(model, data.bags, ks, 42);
  const auto b = evaluate_holdout(model, data.bags, ks, 42);
  REQUIRE(a.size() == 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].map == b[i].map);
    CHECK(a[i].map >= 0.0);
    CHECK(a[i].map <= 1.0);
    CHECK(a[i].queries + a[i].skipped == data.bags.size());
  }

  const Vocabulary vocab = letters(3);
  const std::vector<Bag> singles = {{{0}, "P", "t"}, {{1}, "P", "u"}};
  const FittedModel tiny = fit(singles, vocab, {1, MetricKind::kJaccard});
  CHECK(evaluate_holdout(tiny, singles, ks, 42)[0].skipped == 2);
}

TEST_CASE("index_bags_lenient drops unknown items") {
  const Vocabulary vocab = letters(2);
  const std::vector<RawBag> raw = {{"P", "", "t", {"B", "Z", "A"}, {}},
                                   {"P", "", "u", {"Z"}, {}}};
  const auto bags = index_bags_lenient(raw, vocab);
  CHECK(bags[0].item_indices == std::vector<ItemIndex>{0, 1});
  CHECK(bags[1].item_indices.empty());
}

TEST_CASE("cross_validate is deterministic and fold-complete") {
  const auto data = synthetic_dataset(20);
  const HyperParams params{10, MetricKind::kJaccard};
  const auto a = cross_validate(data.bags, data.vocabulary, params, 4, 5, 42);
  const auto b = cross_validate(data.bags, data.vocabulary, params, 4, 5, 42);
  CHECK(a.fold_scores.size() == 4);
  CHECK(a.fold_scores == b.fold_scores);
  double sum = 0.0;
  for (double f : a.fold_scores) sum += f;
  CHECK(a.mean == doctest::Approx(sum / 4.0));
  CHECK_THROWS_AS(cross_validate(data.bags, data.vocabulary, params, 2000, 5, 42),
                  ParameterError);
}

TEST_CASE("grid_search") {
  const auto data = synthetic_dataset(20);

  SUBCASE("a single cell is the best") {
    GridSpec spec;
    spec.s_values = {20};
    spec.metrics = {MetricKind::kMatching};
    spec.folds = 3;
    const auto grid = grid_search(data.bags, data.vocabulary, spec);
    REQUIRE(grid.cells.size() == 1);
    CHECK(grid.best == HyperParams{20, MetricKind::kMatching});
    CHECK(grid.best_score == grid.cells[0].cv.mean);
  }
  SUBCASE("thread count does not change results") {
    GridSpec spec;
    spec.s_values = {5, 20};
    spec.folds = 3;
    spec.threads = 1;
    const auto sequential = grid_search(data.bags, data.vocabulary, spec);
    spec.threads = 4;
    const auto parallel = grid_search(data.bags, data.vocabulary, spec);
    REQUIRE(sequential.cells.size() == 10);
    for (std::size_t i = 0; i < sequential.cells.size(); ++i) {
      CHECK(sequential.cells[i].params == parallel.cells[i].params);
      CHECK(sequential.cells[i].cv.fold_scores == parallel.cells[i].cv.fold_scores);
    }
    CHECK(sequential.best == parallel.best);
    CHECK(grid_to_json(sequential).dump() == grid_to_json(parallel).dump());
    // Cells are metrics-major.
    CHECK(sequential.cells[0].params == HyperParams{5, kAllMetrics[0]});
    CHECK(sequential.cells[1].params == HyperParams{20, kAllMetrics[0]});
    // The best cell really is the maximum.
    for (const auto& c : sequential.cells) CHECK(c.cv.mean <= sequential.best_score);
  }
  SUBCASE("ties go to the smaller metric name, then the smaller s") {
    const Vocabulary vocab = letters(2);
    const std::vector<Bag> same(6, Bag{{0, 1}, "P", "t"});
    GridSpec spec;
    spec.s_values = {3, 1};
    spec.metrics = {MetricKind::kRussellRao, MetricKind::kMatching, MetricKind::kJaccard};
    spec.folds = 2;
    const auto grid = grid_search(same, vocab, spec);
    for (const auto& c : grid.cells) CHECK(c.cv.mean == 1.0);
    CHECK(grid.best == HyperParams{1, MetricKind::kJaccard});
  }
  SUBCASE("invalid grids") {
    GridSpec spec;
    spec.s_values = {};
    CHECK_THROWS_AS(grid_search(data.bags, data.vocabulary, spec), ParameterError);
    spec.s_values = {0};
    CHECK_THROWS_AS(grid_search(data.bags, data.vocabulary, spec), ParameterError);
  }
}

TEST_CASE("reports") {
  const auto data = synthetic_dataset(15);
  GridSpec spec;
  spec.s_values = {5, 10};
  spec.metrics = {MetricKind::kJaccard, MetricKind::kMatching};
  spec.folds = 3;
  const auto grid = grid_search(data.bags, data.vocabulary, spec);

  const std::string table = format_grid_table(grid);
  CHECK(std::count(table.begin(), table.end(), '*') == 2);  // cell and footer
  CHECK(table.find("jaccard") != std::string::npos);
  CHECK(table.find("matching") != std::string::npos);
  CHECK(table.find("3-fold") != std::string::npos);

  const auto json = grid_to_json(grid);
  CHECK(json["cells"].size() == 4);
  CHECK(json["scoring"] == "map@5");
  CHECK(json["best"]["s"] == grid.best.s);

  const FittedModel model = fit(data.bags, data.vocabulary, {10, MetricKind::kJaccard});
  const std::vector<std::size_t> ks = {3, 5};
  const auto metrics = evaluate(model, data.bags, ks);
  const std::string mt = format_metrics_table(metrics);
  CHECK(mt.find("k=3") != std::string::npos);
  CHECK(mt.find("MAR") != std::string::npos);
  const auto rec = evaluation_to_json(model, {metrics, {}, 0});
  CHECK(rec["results"].size() == 2);
  CHECK_FALSE(rec.contains("holdout"));
  CHECK(rec["model"]["m"] == data.bags.size());
}
