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

#ifndef LABREC_SERVICE_HPP_
#define LABREC_SERVICE_HPP_

// HTTP facade over a fitted model.
//
//   POST /v1/recommendations   {"items": [...], "k": 5, "exclude_selected": true}
//   GET  /v1/items?q=&limit=   typeahead over item names and ids
//   GET  /v1/model             {"metric", "s", "m", "n", "format_version"}
//   GET  /v1/health            {"status": "ok"}
//
// Errors are {"error": {"code": ..., "message": ...}} with 400 EMPTY_QUERY,
// 422 MALFORMED_REQUEST or 503 MODEL_NOT_LOADED.

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "labrec/recommender.hpp"

namespace httplib {
class Server;
}

namespace labrec {

struct ServiceOptions {
  // Sent as Access-Control-Allow-Origin when non-empty.
  std::string cors_origin;
  // Served under "/" when non-empty.
  std::filesystem::path static_dir;
};

struct HttpResponse {
  int status = 200;
  std::string body;
};

inline constexpr std::size_t kDefaultItemLimit = 20;

class RecommendationService {
 public:
  explicit RecommendationService(ServiceOptions options = {})
      : options_(std::move(options)) {}

  // Publishes a new immutable model snapshot. In-flight requests keep the
  // snapshot they started with.
  void load(std::shared_ptr<const FittedModel> model);
  bool loaded() const;

  HttpResponse health() const;
  HttpResponse model_info() const;
  HttpResponse items(std::string_view query, std::string_view limit) const;
  HttpResponse recommend(std::string_view body) const;

  // Registers every route (and static/CORS handling) on `server`.
  void mount(httplib::Server& server) const;

  const ServiceOptions& options() const noexcept { return options_; }

 private:
  std::shared_ptr<const FittedModel> snapshot() const;

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::shared_ptr<const FittedModel> model_;
};

}  // namespace labrec

#endif  // LABREC_SERVICE_HPP_
