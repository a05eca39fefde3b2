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

#include "labrec/persistence.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "labrec/error.hpp"

namespace labrec {

using ordered_json = nlohmann::ordered_json;

std::string utc_now_iso8601() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buffer;
}

ordered_json model_to_json(const FittedModel& model) {
  ordered_json out;
  out["format_version"] = kModelFormatVersion;
  out["metric"] = to_string(model.params().metric);
  out["s"] = model.params().s;
  ordered_json vocabulary = ordered_json::array();
  for (const auto& item : model.vocabulary().items()) {
    vocabulary.push_back({{"item_id", item.item_id}, {"name", item.name}});
  }
  out["vocabulary"] = std::move(vocabulary);
  ordered_json bags = ordered_json::array();
  for (std::size_t u = 0; u < model.matrix().rows(); ++u) {
    bags.push_back(model.matrix().row_indices(u));
  }
  out["bags"] = std::move(bags);
  out["created_at"] = model.provenance().created_at.empty()
                          ? utc_now_iso8601()
                          : model.provenance().created_at;
  out["source_digest"] = model.provenance().source_digest;
  return out;
}

FittedModel model_from_json(const nlohmann::json& document) {
  if (!document.is_object()) throw CorruptModel("model file is not a JSON object");
  const auto version = document.find("format_version");
  if (version == document.end() || !version->is_number_integer()) {
    throw CorruptModel("missing integer format_version");
  }
  if (version->get<int>() != kModelFormatVersion) {
    throw VersionError(fmt::format("unsupported format_version {} (expected {})",
                                   version->get<int>(), kModelFormatVersion));
  }
  try {
    HyperParams params;
    params.metric = parse_metric(document.at("metric").get<std::string>());
    const auto s = document.at("s").get<std::int64_t>();
    if (s < 1) throw CorruptModel(fmt::format("invalid s={}", s));
    params.s = static_cast<std::size_t>(s);

    std::vector<ItemSpec> specs;
    for (const auto& entry : document.at("vocabulary")) {
      specs.push_back({entry.at("item_id").get<std::string>(),
                       entry.at("name").get<std::string>()});
    }
    Vocabulary vocabulary(std::move(specs));

    std::vector<std::vector<ItemIndex>> rows;
    for (const auto& bag : document.at("bags")) {
      std::vector<ItemIndex> row;
      for (const auto& index : bag) {
        const auto j = index.get<std::int64_t>();
        if (j < 0 || static_cast<std::size_t>(j) >= vocabulary.size()) {
          throw CorruptModel(fmt::format("bag index {} out of range (n={})", j,
                                         vocabulary.size()));
        }
        row.push_back(static_cast<ItemIndex>(j));
      }
      if (row.empty()) throw CorruptModel("empty bag in model file");
      rows.push_back(std::move(row));
    }
    if (rows.empty()) throw CorruptModel("model file has no bags");

    ModelProvenance provenance{document.at("created_at").get<std::string>(),
                               document.at("source_digest").get<std::string>()};
    BagItemMatrix matrix(vocabulary.size(), rows);
    return FittedModel(std::move(matrix), std::move(vocabulary), params, std::move(provenance));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(e.what());
  } catch (const ParameterError& e) {
    throw CorruptModel(e.what());
  }
}

void save_model(const FittedModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path.string()));
  out << model_to_json(model).dump(1) << '\n';
  if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

FittedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json document;
  try {
    document = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptModel(fmt::format("{}: {}", path.string(), e.what()));
  }
  return model_from_json(document);
}

}  // namespace labrec
