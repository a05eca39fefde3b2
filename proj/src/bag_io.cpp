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

#include "labrec/bag_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "labrec/error.hpp"

namespace labrec {

using ordered_json = nlohmann::ordered_json;

void write_bags(std::ostream& out, std::span<const RawBag> bags) {
  for (const auto& bag : bags) {
    ordered_json record;
    record["subject_id"] = bag.subject_id;
    if (!bag.hadm_id.empty()) record["hadm_id"] = bag.hadm_id;
    record["charttime"] = bag.charttime;
    record["items"] = bag.item_ids;
    bool has_names = false;
    for (const auto& name : bag.item_names) has_names |= !name.empty();
    if (has_names) record["names"] = bag.item_names;
    out << record.dump() << '\n';
  }
}

void write_bags(const std::filesystem::path& path,
                std::span<const RawBag> bags) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  write_bags(out, bags);
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

std::vector<RawBag> read_bags(std::istream& in) {
  std::vector<RawBag> bags;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      const auto record = nlohmann::json::parse(line);
      RawBag bag;
      bag.subject_id = record.at("subject_id").get<std::string>();
      bag.charttime = record.at("charttime").get<std::string>();
      bag.item_ids = record.at("items").get<std::vector<std::string>>();
      if (auto it = record.find("hadm_id"); it != record.end()) {
        bag.hadm_id = it->get<std::string>();
      }
      if (auto it = record.find("names"); it != record.end()) {
        bag.item_names = it->get<std::vector<std::string>>();
        if (bag.item_names.size() != bag.item_ids.size()) {
          throw ParameterError("names and items differ in length");
        }
      }
      bags.push_back(std::move(bag));
    } catch (const nlohmann::json::exception& e) {
      throw ParameterError(
          fmt::format("malformed bag record on line {}: {}", line_no, e.what()));
    } catch (const ParameterError& e) {
      throw ParameterError(
          fmt::format("malformed bag record on line {}: {}", line_no, e.what()));
    }
  }
  return bags;
}

std::vector<RawBag> read_bags(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  return read_bags(in);
}

}  // namespace labrec
