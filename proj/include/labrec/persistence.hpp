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

#ifndef LABREC_PERSISTENCE_HPP_
#define LABREC_PERSISTENCE_HPP_

// Model file: one UTF-8 JSON document.
//
//   {
//     "format_version": 1,
//     "metric": "jaccard",
//     "s": 20,
//     "vocabulary": [{"item_id": "50868", "name": "Anion Gap"}, ...],
//     "bags": [[0, 3, 7], ...],
//     "created_at": "2026-01-01T00:00:00Z",
//     "source_digest": "sha256:..."
//   }
//
// Bags are stored as sorted index arrays; bitsets are rebuilt on load.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "labrec/recommender.hpp"

namespace labrec {

inline constexpr int kModelFormatVersion = 1;

nlohmann::ordered_json model_to_json(const FittedModel& model);

// Throws VersionError for an unsupported format_version and CorruptModel for
// anything structurally wrong.
FittedModel model_from_json(const nlohmann::json& document);

// Fills created_at with the current UTC time when the model has none.
// Throws IoError.
void save_model(const FittedModel& model, const std::filesystem::path& path);

// Throws IoError when unreadable, CorruptModel on malformed or truncated
// content, VersionError on an unknown format_version.
FittedModel load_model(const std::filesystem::path& path);

std::string utc_now_iso8601();

}  // namespace labrec

#endif  // LABREC_PERSISTENCE_HPP_
