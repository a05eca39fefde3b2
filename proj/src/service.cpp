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

#include "labrec/service.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <tuple>

#include <httplib.h>
#include <json.hpp>

#include "labrec/error.hpp"
#include "labrec/persistence.hpp"

namespace labrec {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

HttpResponse json_response(int status, const ordered_json& body) {
  return {status, body.dump()};
}

HttpResponse error_response(int status, std::string_view code,
                            std::string_view message) {
  ordered_json body;
  body["error"] = {{"code", code}, {"message", message}};
  return json_response(status, body);
}

HttpResponse not_loaded() {
  return error_response(503, "MODEL_NOT_LOADED", "no model is loaded");
}

std::string fold(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::size_t parse_limit(std::string_view text) {
  std::size_t limit = kDefaultItemLimit;
  if (text.empty()) return limit;
  std::size_t parsed = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), parsed);
  if (ec == std::errc() && end == text.data() + text.size()) limit = parsed;
  return limit;
}

}  // namespace

void RecommendationService::load(std::shared_ptr<const FittedModel> model) {
  std::lock_guard lock(mutex_);
  model_ = std::move(model);
}

bool RecommendationService::loaded() const { return snapshot() != nullptr; }

std::shared_ptr<const FittedModel> RecommendationService::snapshot() const {
  std::lock_guard lock(mutex_);
  return model_;
}

HttpResponse RecommendationService::health() const {
  return json_response(200, {{"status", "ok"}});
}

HttpResponse RecommendationService::model_info() const {
  const auto model = snapshot();
  if (!model) return not_loaded();
  ordered_json body;
  body["metric"] = to_string(model->params().metric);
  body["s"] = model->params().s;
  body["m"] = model->matrix().rows();
  body["n"] = model->matrix().cols();
  body["format_version"] = kModelFormatVersion;
  return json_response(200, body);
}

HttpResponse RecommendationService::items(std::string_view query,
                                          std::string_view limit_text) const {
  const auto model = snapshot();
  if (!model) return not_loaded();
  const std::size_t limit = parse_limit(limit_text);
  const std::string needle = fold(trim(query));
  const auto vocabulary = model->vocabulary().items();

  // (match position, name, index)
  std::vector<std::tuple<std::size_t, std::string_view, std::size_t>> matches;
  for (const auto& item : vocabulary) {
    if (needle.empty()) {
      matches.emplace_back(0, std::string_view(), item.index);
      continue;
    }
    const auto in_name = fold(item.name).find(needle);
    const auto in_id = fold(item.item_id).find(needle);
    const auto position = std::min(in_name, in_id);
    if (position != std::string::npos) {
      matches.emplace_back(position, item.name, item.index);
    }
  }
  // Empty query keeps vocabulary order.
  if (!needle.empty()) std::sort(matches.begin(), matches.end());
  if (matches.size() > limit) matches.resize(limit);

  ordered_json body = ordered_json::array();
  for (const auto& match : matches) {
    const auto& item = vocabulary[std::get<2>(match)];
    body.push_back({{"item_id", item.item_id}, {"name", item.name}});
  }
  return json_response(200, body);
}

HttpResponse RecommendationService::recommend(std::string_view body_text) const {
  const auto model = snapshot();
  if (!model) return not_loaded();

  json request;
  try {
    request = json::parse(body_text);
  } catch (const json::exception& e) {
    return error_response(422, "MALFORMED_REQUEST", e.what());
  }
  if (!request.is_object()) {
    return error_response(422, "MALFORMED_REQUEST", "body must be a JSON object");
  }
  const auto items_it = request.find("items");
  if (items_it == request.end() || !items_it->is_array()) {
    return error_response(422, "MALFORMED_REQUEST", "'items' must be an array");
  }
  std::vector<std::string> items;
  for (const auto& item : *items_it) {
    if (!item.is_string()) {
      return error_response(422, "MALFORMED_REQUEST",
                            "'items' must contain only strings");
    }
    std::string trimmed = trim(item.get<std::string>());
    if (!trimmed.empty()) items.push_back(std::move(trimmed));
  }
  std::size_t k = kDefaultK;
  if (auto it = request.find("k"); it != request.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 1) {
      return error_response(422, "MALFORMED_REQUEST",
                            "'k' must be a positive integer");
    }
    k = it->get<std::size_t>();
  }
  bool exclude = true;
  if (auto it = request.find("exclude_selected");
      it != request.end() && !it->is_null()) {
    if (!it->is_boolean()) {
      return error_response(422, "MALFORMED_REQUEST",
                            "'exclude_selected' must be a boolean");
    }
    exclude = it->get<bool>();
  }
  if (items.empty()) {
    return error_response(400, "EMPTY_QUERY", "no items in request");
  }

  RankedRecommendation ranked;
  try {
    ranked = labrec::recommend(*model, items, k, exclude);
  } catch (const EmptyQuery&) {
    ordered_json body;
    body["error"] = {{"code", "EMPTY_QUERY"},
                     {"message", "none of the requested items are known"}};
    body["unknown_items"] = items;
    return json_response(400, body);
  }

  ordered_json body;
  ordered_json recommendations = ordered_json::array();
  for (const auto& entry : ranked.entries) {
    recommendations.push_back({{"item_id", entry.item.item_id},
                               {"name", entry.item.name},
                               {"score", entry.score}});
  }
  body["recommendations"] = std::move(recommendations);
  body["unknown_items"] = ranked.unknown_items;
  body["model"] = {{"metric", to_string(model->params().metric)},
                   {"s", model->params().s}};
  return json_response(200, body);
}

void RecommendationService::mount(httplib::Server& server) const {
  auto send = [this](httplib::Response& res, const HttpResponse& out) {
    res.status = out.status;
    res.set_content(out.body, "application/json");
    if (!options_.cors_origin.empty()) {
      res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
    }
  };
  server.Get("/v1/health", [this, send](const httplib::Request&,
                                        httplib::Response& res) {
    send(res, health());
  });
  server.Get("/v1/model", [this, send](const httplib::Request&,
                                       httplib::Response& res) {
    send(res, model_info());
  });
  server.Get("/v1/items", [this, send](const httplib::Request& req,
                                       httplib::Response& res) {
    send(res, items(req.get_param_value("q"), req.get_param_value("limit")));
  });
  server.Post("/v1/recommendations", [this, send](const httplib::Request& req,
                                                  httplib::Response& res) {
    send(res, recommend(req.body));
  });
  if (!options_.cors_origin.empty()) {
    server.Options(R"(/v1/.*)", [this](const httplib::Request&,
                                       httplib::Response& res) {
      res.status = 204;
      res.set_header("Access-Control-Allow-Origin", options_.cors_origin);
      res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
    });
  }
  if (!options_.static_dir.empty()) {
    server.set_mount_point("/", options_.static_dir.string());
  }
}

}  // namespace labrec
