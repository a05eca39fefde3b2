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

#ifndef LABREC_INGEST_HPP_
#define LABREC_INGEST_HPP_

// LABEVENTS / D_LABITEMS ingestion. Rows ordered for the same patient at the
// same CHARTTIME form one bag.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "labrec/core.hpp"

namespace labrec {

struct LabEventRow {
  std::string subject_id;
  std::string hadm_id;  // may be empty
  std::string itemid;
  std::string charttime;
};

struct LabEvents {
  std::vector<LabEventRow> rows;
  // Data lines dropped because CHARTTIME, SUBJECT_ID or ITEMID was empty.
  std::size_t skipped = 0;
};

// Header match is case-insensitive. Throws SchemaError naming the first
// missing column of SUBJECT_ID, ITEMID, CHARTTIME; IoError if unreadable.
LabEvents parse_labevents(std::istream& in);
LabEvents parse_labevents(const std::filesystem::path& csv_path);

enum class GroupingKey {
  kSubjectCharttime,
  kSubjectHadmCharttime,
};

const char* to_string(GroupingKey key);

// Groups rows into bags, sorted by (subject_id, [hadm_id,] charttime). Items
// inside a bag are the distinct itemids in file order.
std::vector<RawBag> extract_bags(
    std::span<const LabEventRow> rows,
    GroupingKey key = GroupingKey::kSubjectCharttime);

// Returns a copy of `vocabulary` whose names come from D_LABITEMS LABEL.
// Items absent from the dictionary are named by their item_id.
Vocabulary join_item_names(const Vocabulary& vocabulary, std::istream& d_labitems);
Vocabulary join_item_names(const Vocabulary& vocabulary,
                           const std::filesystem::path& d_labitems_path);

// Fills RawBag::item_names from `vocabulary`.
void label_bags(std::span<RawBag> bags, const Vocabulary& vocabulary);

struct IngestSummary {
  std::size_t rows_parsed = 0;
  std::size_t rows_skipped = 0;
  std::size_t bags = 0;
  std::size_t distinct_bag_contents = 0;
  std::size_t distinct_items = 0;
  std::size_t distinct_patients = 0;
};

IngestSummary summarize(const LabEvents& events, std::span<const RawBag> bags);

}  // namespace labrec

#endif  // LABREC_INGEST_HPP_
