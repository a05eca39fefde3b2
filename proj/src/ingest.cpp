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

#include "labrec/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "labrec/csv.hpp"
#include "labrec/error.hpp"

namespace labrec {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

class Header {
 public:
  explicit Header(std::vector<std::string> fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::string name = trim(fields[i]);
      // UTF-8 byte order mark on the first column.
      if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
      columns_.emplace(upper(name), i);
    }
  }

  std::optional<std::size_t> find(std::string_view column) const {
    if (auto it = columns_.find(std::string(column)); it != columns_.end()) {
      return it->second;
    }
    return std::nullopt;
  }

  std::size_t require(std::string_view column) const {
    if (auto index = find(column)) return *index;
    throw SchemaError(std::string(column));
  }

 private:
  std::unordered_map<std::string, std::size_t> columns_;
};

std::string field_at(const std::vector<std::string>& fields, std::size_t i) {
  return i < fields.size() ? trim(fields[i]) : std::string();
}

bool is_blank_record(const std::vector<std::string>& fields) {
  return fields.size() == 1 && trim(fields[0]).empty();
}

}  // namespace

LabEvents parse_labevents(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  LabEvents events;
  if (!reader.next(fields)) throw SchemaError("SUBJECT_ID");
  const Header header(std::move(fields));
  const std::size_t subject_col = header.require("SUBJECT_ID");
  const std::size_t item_col = header.require("ITEMID");
  const std::size_t time_col = header.require("CHARTTIME");
  const auto hadm_col = header.find("HADM_ID");

  while (reader.next(fields)) {
    if (is_blank_record(fields)) continue;
    LabEventRow row{field_at(fields, subject_col),
                    hadm_col ? field_at(fields, *hadm_col) : std::string(),
                    field_at(fields, item_col), field_at(fields, time_col)};
    if (row.subject_id.empty() || row.itemid.empty() || row.charttime.empty()) {
      ++events.skipped;
      continue;
    }
    events.rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read error while parsing LABEVENTS");
  return events;
}

LabEvents parse_labevents(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", csv_path.string()));
  return parse_labevents(in);
}

const char* to_string(GroupingKey key) {
  switch (key) {
    case GroupingKey::kSubjectCharttime:
      return "subject_id+charttime";
    case GroupingKey::kSubjectHadmCharttime:
      return "subject_id+hadm_id+charttime";
  }
  return "?";
}

std::vector<RawBag> extract_bags(std::span<const LabEventRow> rows,
                                 GroupingKey key) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, RawBag> groups;
  std::map<Key, std::unordered_set<std::string>> seen;
  for (const auto& row : rows) {
    Key k{row.subject_id,
          key == GroupingKey::kSubjectHadmCharttime ? row.hadm_id : std::string(),
          row.charttime};
    auto [it, inserted] = groups.try_emplace(k);
    RawBag& bag = it->second;
    if (inserted) {
      bag.subject_id = row.subject_id;
      if (key == GroupingKey::kSubjectHadmCharttime) bag.hadm_id = row.hadm_id;
      bag.charttime = row.charttime;
    }
    if (seen[k].insert(row.itemid).second) bag.item_ids.push_back(row.itemid);
  }
  std::vector<RawBag> bags;
  bags.reserve(groups.size());
  for (auto& [k, bag] : groups) bags.push_back(std::move(bag));
  return bags;
}

Vocabulary join_item_names(const Vocabulary& vocabulary,
                           std::istream& d_labitems) {
  CsvReader reader(d_labitems);
  std::vector<std::string> fields;
  std::unordered_map<std::string, std::string> labels;
  if (reader.next(fields)) {
    const Header header(std::move(fields));
    const std::size_t id_col = header.require("ITEMID");
    const std::size_t label_col = header.require("LABEL");
    while (reader.next(fields)) {
      if (is_blank_record(fields)) continue;
      std::string id = field_at(fields, id_col);
      std::string label = field_at(fields, label_col);
      if (!id.empty() && !label.empty()) labels.emplace(std::move(id), std::move(label));
    }
  }
  std::vector<ItemSpec> specs;
  specs.reserve(vocabulary.size());
  for (const auto& item : vocabulary.items()) {
    auto it = labels.find(item.item_id);
    specs.push_back({item.item_id, it != labels.end() ? it->second : item.item_id});
  }
  return Vocabulary(std::move(specs));
}

Vocabulary join_item_names(const Vocabulary& vocabulary,
                           const std::filesystem::path& d_labitems_path) {
  std::ifstream in(d_labitems_path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", d_labitems_path.string()));
  return join_item_names(vocabulary, in);
}

void label_bags(std::span<RawBag> bags, const Vocabulary& vocabulary) {
  for (auto& bag : bags) {
    bag.item_names.clear();
    for (const auto& id : bag.item_ids) {
      auto index = vocabulary.find_id(id);
      bag.item_names.push_back(index ? vocabulary[*index].name : id);
    }
  }
}

IngestSummary summarize(const LabEvents& events, std::span<const RawBag> bags) {
  IngestSummary summary;
  summary.rows_parsed = events.rows.size();
  summary.rows_skipped = events.skipped;
  summary.bags = bags.size();
  std::set<std::string> items;
  std::set<std::string> patients;
  std::set<std::vector<std::string>> contents;
  for (const auto& bag : bags) {
    patients.insert(bag.subject_id);
    items.insert(bag.item_ids.begin(), bag.item_ids.end());
    auto sorted = bag.item_ids;
    std::sort(sorted.begin(), sorted.end());
    contents.insert(std::move(sorted));
  }
  summary.distinct_items = items.size();
  summary.distinct_patients = patients.size();
  summary.distinct_bag_contents = contents.size();
  return summary;
}

}  // namespace labrec
