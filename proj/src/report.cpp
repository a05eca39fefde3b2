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

#include "labrec/report.hpp"

#include <fmt/format.h>

namespace labrec {

using ordered_json = nlohmann::ordered_json;

std::string format_grid_table(const GridResult& grid) {
  constexpr std::size_t kCell = 10;
  std::string out = fmt::format("{:<16}{:^{}}\n", "", "Value of s",
                                kCell * grid.spec.s_values.size());
  out += fmt::format("{:<16}", "Distance metric");
  for (std::size_t s : grid.spec.s_values) out += fmt::format("{:>{}} ", s, kCell - 1);
  out += '\n';
  for (MetricKind metric : grid.spec.metrics) {
    out += fmt::format("{:<16}", to_string(metric));
    for (std::size_t s : grid.spec.s_values) {
      const auto& c = grid.cell(metric, s);
      out += fmt::format("{:>{}.2f}%{}", 100.0 * c.cv.mean, kCell - 2,
                         c.params == grid.best ? '*' : ' ');
    }
    out += '\n';
  }
  out += fmt::format(
      "Mean {}-fold cross-validated MAP@{}; * marks the best cell "
      "(metric={}, s={}, score={:.2f}%).\n",
      grid.spec.folds, grid.spec.scoring_k, to_string(grid.best.metric),
      grid.best.s, 100.0 * grid.best_score);
  return out;
}

std::string format_metrics_table(std::span<const RetrievalMetrics> metrics) {
  std::string out = fmt::format("{:<20}", "Performance metric");
  for (const auto& m : metrics) out += fmt::format("{:>9}", fmt::format("k={}", m.k));
  out += fmt::format("\n{:<20}", "MAP");
  for (const auto& m : metrics) out += fmt::format("{:>8.2f}%", 100.0 * m.map);
  out += fmt::format("\n{:<20}", "MAR");
  for (const auto& m : metrics) out += fmt::format("{:>8.2f}%", 100.0 * m.mar);
  out += '\n';
  if (!metrics.empty()) {
    out += fmt::format("queries={} skipped={}\n", metrics.front().queries,
                       metrics.front().skipped);
  }
  return out;
}

ordered_json grid_to_json(const GridResult& grid) {
  ordered_json out;
  out["s_values"] = grid.spec.s_values;
  ordered_json metrics = ordered_json::array();
  for (MetricKind m : grid.spec.metrics) metrics.push_back(to_string(m));
  out["metrics"] = std::move(metrics);
  out["folds"] = grid.spec.folds;
  out["scoring"] = fmt::format("map@{}", grid.spec.scoring_k);
  out["scoring_k"] = grid.spec.scoring_k;
  out["seed"] = grid.spec.seed;
  ordered_json cells = ordered_json::array();
  for (const auto& c : grid.cells) {
    ordered_json cell;
    cell["metric"] = to_string(c.params.metric);
    cell["s"] = c.params.s;
    cell["mean"] = c.cv.mean;
    cell["fold_scores"] = c.cv.fold_scores;
    cells.push_back(std::move(cell));
  }
  out["cells"] = std::move(cells);
  out["best"] = {{"metric", to_string(grid.best.metric)},
                 {"s", grid.best.s},
                 {"score", grid.best_score}};
  return out;
}

ordered_json metrics_to_json(std::span<const RetrievalMetrics> metrics) {
  ordered_json out = ordered_json::array();
  for (const auto& m : metrics) {
    out.push_back({{"k", m.k},
                   {"map", m.map},
                   {"mar", m.mar},
                   {"queries", m.queries},
                   {"skipped", m.skipped}});
  }
  return out;
}

ordered_json evaluation_to_json(const FittedModel& model,
                                const EvaluationRecord& record) {
  ordered_json out;
  out["model"] = {{"metric", to_string(model.params().metric)},
                  {"s", model.params().s},
                  {"m", model.matrix().rows()},
                  {"n", model.matrix().cols()},
                  {"source_digest", model.provenance().source_digest}};
  out["protocol"] = {{"query", "full bag"},
                     {"relevant", "same bag"},
                     {"exclude_query_items", false}};
  out["results"] = metrics_to_json(record.full_bag);
  if (!record.holdout.empty()) {
    out["holdout"] = {
        {"protocol",
         {{"query", "bag minus held-out half"},
          {"relevant", "held-out half"},
          {"exclude_query_items", true},
          {"seed", record.holdout_seed}}},
        {"results", metrics_to_json(record.holdout)}};
  }
  return out;
}

}  // namespace labrec
