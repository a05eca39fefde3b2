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

#ifndef LABREC_REPORT_HPP_
#define LABREC_REPORT_HPP_

#include <span>
#include <string>

#include <json.hpp>

#include "labrec/eval.hpp"
#include "labrec/recommender.hpp"

namespace labrec {

// Metric rows x s columns of mean CV scores as percentages with two
// decimals; the best cell is starred.
std::string format_grid_table(const GridResult& grid);

// One column per k, MAP and MAR rows.
std::string format_metrics_table(std::span<const RetrievalMetrics> metrics);

// Machine-readable records. They carry no timestamps so identical runs
// serialize to identical bytes.
nlohmann::ordered_json grid_to_json(const GridResult& grid);
nlohmann::ordered_json metrics_to_json(std::span<const RetrievalMetrics> metrics);

struct EvaluationRecord {
  std::span<const RetrievalMetrics> full_bag;
  std::span<const RetrievalMetrics> holdout;
  std::uint64_t holdout_seed = 0;
};

nlohmann::ordered_json evaluation_to_json(const FittedModel& model,
                                          const EvaluationRecord& record);

}  // namespace labrec

#endif  // LABREC_REPORT_HPP_
