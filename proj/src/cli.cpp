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

#include "labrec/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "labrec/bag_io.hpp"
#include "labrec/digest.hpp"
#include "labrec/error.hpp"
#include "labrec/eval.hpp"
#include "labrec/ingest.hpp"
#include "labrec/persistence.hpp"
#include "labrec/recommender.hpp"
#include "labrec/report.hpp"
#include "labrec/service.hpp"

namespace labrec {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write {}", path));
  out << content;
  if (!out) throw IoError(fmt::format("write failed for {}", path));
}

// All bags in a bags file, indexed against the vocabulary built from the
// whole file.
struct Dataset {
  std::vector<RawBag> raw;
  Vocabulary vocabulary;
  std::vector<Bag> bags;
  std::string digest;
};

Dataset load_dataset(const std::string& path) {
  Dataset data;
  const std::string content = read_file(path);
  std::istringstream in(content);
  data.raw = read_bags(in);
  data.vocabulary = build_vocabulary(data.raw);
  data.bags = index_bags(data.raw, data.vocabulary);
  data.digest = "sha256:" + sha256_hex(content);
  return data;
}

enum class Side { kTrain, kTest };

// Bag indices recorded by `fit` for one side of the split.
std::vector<std::size_t> manifest_side(const std::string& manifest_path,
                                       const Dataset& data, Side side) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
    if (manifest.at("m").get<std::size_t>() != data.bags.size() ||
        manifest.at("bags_digest").get<std::string>() != data.digest) {
      throw ParameterError(fmt::format(
          "manifest {} was written for a different bags file", manifest_path));
    }
    auto indices = manifest.at(side == Side::kTrain ? "train" : "test")
                       .get<std::vector<std::size_t>>();
    for (std::size_t i : indices) {
      if (i >= data.bags.size()) {
        throw ParameterError(fmt::format("manifest index {} out of range", i));
      }
    }
    return indices;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(fmt::format("malformed manifest {}: {}", manifest_path,
                                     e.what()));
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const auto first = part.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    const auto last = part.find_last_not_of(" \t");
    out.push_back(part.substr(first, last - first + 1));
  }
  return out;
}

Side parse_side(const std::string& side) {
  if (side == "train") return Side::kTrain;
  if (side == "test") return Side::kTest;
  throw ParameterError(fmt::format("--side must be train or test, got '{}'", side));
}

struct IngestOptions {
  std::string labevents;
  std::string d_labitems;
  std::string out;
  bool group_by_hadm = false;
};

int run_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const LabEvents events = parse_labevents(std::filesystem::path(opt.labevents));
  const GroupingKey key = opt.group_by_hadm ? GroupingKey::kSubjectHadmCharttime
                                            : GroupingKey::kSubjectCharttime;
  std::vector<RawBag> bags = extract_bags(events.rows, key);
  std::size_t labelled = 0;
  if (!opt.d_labitems.empty() && !bags.empty()) {
    const Vocabulary named = join_item_names(
        build_vocabulary(bags), std::filesystem::path(opt.d_labitems));
    for (const auto& item : named.items()) labelled += item.name != item.item_id;
    label_bags(bags, named);
  }
  write_bags(std::filesystem::path(opt.out), bags);
  const IngestSummary summary = summarize(events, bags);
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  out << fmt::format(
      "grouping: {}\nrows parsed: {}\nrows skipped: {}\nbags extracted: {}\n"
      "distinct bag contents: {}\ndistinct items: {}\ndistinct patients: {}\n",
      to_string(key), summary.rows_parsed, summary.rows_skipped, summary.bags,
      summary.distinct_bag_contents, summary.distinct_items,
      summary.distinct_patients);
  if (!opt.d_labitems.empty()) out << fmt::format("labelled items: {}\n", labelled);
  out << fmt::format("elapsed: {:.3f}s\n", seconds);
  if (summary.bags == 0) err << "warning: no bags extracted\n";
  return kExitOk;
}

struct FitOptions {
  std::string bags;
  std::size_t s = 20;
  std::string metric = "jaccard";
  std::string out;
  std::string manifest;
  double test_fraction = 1.0 / 3.0;
  std::uint64_t seed = kDefaultSeed;
};

int run_fit(const FitOptions& opt, std::ostream& out, std::ostream&) {
  const HyperParams params{opt.s, parse_metric(opt.metric)};
  validate(params);
  const Dataset data = load_dataset(opt.bags);
  const Split split =
      train_test_split(data.bags.size(), {opt.test_fraction, opt.seed});
  const auto train = gather<Bag>(data.bags, split.train);
  const FittedModel model = fit(train, data.vocabulary, params);
  save_model(model, opt.out);

  ordered_json manifest;
  manifest["seed"] = opt.seed;
  manifest["test_fraction"] = opt.test_fraction;
  manifest["m"] = data.bags.size();
  manifest["bags_digest"] = data.digest;
  manifest["train"] = split.train;
  manifest["test"] = split.test;
  const std::string manifest_path =
      opt.manifest.empty() ? opt.out + ".split.json" : opt.manifest;
  write_file(manifest_path, manifest.dump() + "\n");

  out << fmt::format(
      "model: {} (metric={}, s={}, m={}, n={})\nsplit: {} train / {} test "
      "(seed={}) -> {}\n",
      opt.out, to_string(params.metric), params.s, model.matrix().rows(),
      model.matrix().cols(), split.train.size(), split.test.size(), opt.seed,
      manifest_path);
  return kExitOk;
}

struct GridOptions {
  std::string bags;
  std::string manifest;
  std::string side = "train";
  std::string s_values = "10,20,50,80,100";
  std::string metrics = "jaccard,kulsinski,matching,rogerstanimoto,russellrao";
  std::size_t folds = 5;
  std::size_t scoring_k = 5;
  std::uint64_t seed = kDefaultSeed;
  unsigned threads = 0;
  std::string report;
};

std::vector<std::size_t> parse_sizes(const std::string& text,
                                     std::string_view flag) {
  std::vector<std::size_t> out;
  for (const auto& part : split_list(text)) {
    std::size_t value = 0;
    const auto [end, ec] =
        std::from_chars(part.data(), part.data() + part.size(), value);
    if (ec != std::errc() || end != part.data() + part.size() || value < 1) {
      throw ParameterError(
          fmt::format("{} expects positive integers, got '{}'", flag, part));
    }
    out.push_back(value);
  }
  if (out.empty()) throw ParameterError(fmt::format("{} is empty", flag));
  return out;
}

int run_grid(const GridOptions& opt, std::ostream& out, std::ostream&) {
  GridSpec grid;
  grid.s_values = parse_sizes(opt.s_values, "--s");
  grid.metrics.clear();
  for (const auto& name : split_list(opt.metrics)) {
    grid.metrics.push_back(parse_metric(name));
  }
  if (grid.metrics.empty()) throw ParameterError("--metrics is empty");
  grid.folds = opt.folds;
  grid.scoring_k = opt.scoring_k;
  grid.seed = opt.seed;
  grid.threads = opt.threads;

  const Dataset data = load_dataset(opt.bags);
  std::vector<Bag> bags = data.bags;
  if (!opt.manifest.empty()) {
    bags = gather<Bag>(data.bags,
                       manifest_side(opt.manifest, data, parse_side(opt.side)));
  }
  const GridResult result = grid_search(bags, data.vocabulary, grid);

  out << format_grid_table(result);
  out << fmt::format("best: metric={} s={}\n", to_string(result.best.metric),
                     result.best.s);
  ordered_json report;
  report["bags_digest"] = data.digest;
  report["bags_used"] = bags.size();
  report["n"] = data.vocabulary.size();
  report["grid"] = grid_to_json(result);
  write_file(opt.report, report.dump(2) + "\n");
  return kExitOk;
}

struct EvaluateOptions {
  std::string model;
  std::string bags;
  std::string manifest;
  std::string side = "test";
  std::string ks = "3,5,10";
  std::string report;
  std::uint64_t holdout_seed = kDefaultSeed;
};

int run_evaluate(const EvaluateOptions& opt, std::ostream& out, std::ostream&) {
  const FittedModel model = load_model(opt.model);
  const auto ks = parse_sizes(opt.ks, "--k");
  std::vector<RawBag> raw = read_bags(std::filesystem::path(opt.bags));
  if (!opt.manifest.empty()) {
    const Dataset data = load_dataset(opt.bags);
    raw = gather<RawBag>(data.raw,
                         manifest_side(opt.manifest, data, parse_side(opt.side)));
  }
  if (raw.empty()) throw EmptyDataset("no evaluation bags");
  const auto bags = index_bags_lenient(raw, model.vocabulary());
  const auto full = evaluate(model, bags, ks);
  const auto holdout = evaluate_holdout(model, bags, ks, opt.holdout_seed);

  out << fmt::format("model: metric={} s={} m={}\n",
                     to_string(model.params().metric), model.params().s,
                     model.matrix().rows());
  out << format_metrics_table(full);
  out << "\nleave-half-out protocol (query = bag minus held-out half, "
         "selected items excluded):\n";
  out << format_metrics_table(holdout);
  if (!opt.report.empty()) {
    const EvaluationRecord record{full, holdout, opt.holdout_seed};
    write_file(opt.report, evaluation_to_json(model, record).dump(2) + "\n");
  }
  return kExitOk;
}

struct RecommendOptions {
  std::string model;
  std::string items;
  std::size_t k = kDefaultK;
  bool include_selected = false;
};

int run_recommend(const RecommendOptions& opt, std::ostream& out,
                  std::ostream& err) {
  const FittedModel model = load_model(opt.model);
  const auto items = split_list(opt.items);
  const auto ranked = recommend(model, items, opt.k, !opt.include_selected);
  for (const auto& unknown : ranked.unknown_items) {
    err << fmt::format("warning: unknown item '{}'\n", unknown);
  }
  for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
    const auto& e = ranked.entries[i];
    out << fmt::format("{}\t{}\t{}\t{}\n", i + 1, e.item.item_id, e.item.name,
                       e.score);
  }
  return kExitOk;
}

struct ServeOptions {
  std::string model;
  std::string host = "0.0.0.0";
  int port = 8080;
  std::string static_dir;
  std::string cors_origin;
};

int run_serve(const ServeOptions& opt, std::ostream& out, std::ostream& err) {
  ServiceOptions options;
  options.cors_origin = opt.cors_origin;
  options.static_dir = opt.static_dir;
  RecommendationService service(options);
  // The model is in place before the listener accepts any request.
  service.load(std::make_shared<const FittedModel>(load_model(opt.model)));
  httplib::Server server;
  service.mount(server);
  out << fmt::format("listening on http://{}:{}\n", opt.host, opt.port);
  out.flush();
  if (!server.listen(opt.host, opt.port)) {
    err << fmt::format("error: cannot listen on {}:{}\n", opt.host, opt.port);
    return kExitUserError;
  }
  return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"labrec: laboratory test recommender"};
  app.require_subcommand(1);

  IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Group LABEVENTS rows into bags");
  ingest_cmd->add_option("--labevents", ingest.labevents, "LABEVENTS CSV")->required();
  ingest_cmd->add_option("--d-labitems", ingest.d_labitems, "D_LABITEMS CSV for names");
  ingest_cmd->add_option("--out", ingest.out, "Bags output (JSON Lines)")->required();
  ingest_cmd->add_flag("--group-by-hadm", ingest.group_by_hadm,
                       "Group by (SUBJECT_ID, HADM_ID, CHARTTIME)");

  FitOptions fit_opt;
  auto* fit_cmd = app.add_subcommand("fit", "Split bags and fit a model on the train side");
  fit_cmd->add_option("--bags", fit_opt.bags)->required();
  fit_cmd->add_option("--s", fit_opt.s, "Neighbour count")->capture_default_str();
  fit_cmd->add_option("--metric", fit_opt.metric)->capture_default_str();
  fit_cmd->add_option("--out", fit_opt.out, "Model file")->required();
  fit_cmd->add_option("--manifest", fit_opt.manifest,
                      "Split manifest (default <out>.split.json)");
  fit_cmd->add_option("--test-fraction", fit_opt.test_fraction)->capture_default_str();
  fit_cmd->add_option("--seed", fit_opt.seed)->capture_default_str();

  GridOptions grid;
  auto* grid_cmd = app.add_subcommand("grid-search", "Cross-validated grid search over (s, metric)");
  grid_cmd->add_option("--bags", grid.bags)->required();
  grid_cmd->add_option("--manifest", grid.manifest, "Restrict to one side of a fit split");
  grid_cmd->add_option("--side", grid.side)->capture_default_str();
  grid_cmd->add_option("--s", grid.s_values)->capture_default_str();
  grid_cmd->add_option("--metrics", grid.metrics)->capture_default_str();
  grid_cmd->add_option("--folds", grid.folds)->capture_default_str();
  grid_cmd->add_option("--scoring-k", grid.scoring_k)->capture_default_str();
  grid_cmd->add_option("--seed", grid.seed)->capture_default_str();
  grid_cmd->add_option("--threads", grid.threads, "0 = hardware concurrency");
  grid_cmd->add_option("--report", grid.report, "JSON report path")->required();

  EvaluateOptions eval_opt;
  auto* eval_cmd = app.add_subcommand("evaluate", "MAP@k / MAR@k over a bag set");
  eval_cmd->add_option("--model", eval_opt.model)->required();
  eval_cmd->add_option("--bags", eval_opt.bags)->required();
  eval_cmd->add_option("--manifest", eval_opt.manifest, "Select one side of a fit split");
  eval_cmd->add_option("--side", eval_opt.side)->capture_default_str();
  eval_cmd->add_option("--k", eval_opt.ks)->capture_default_str();
  eval_cmd->add_option("--report", eval_opt.report, "JSON report path");
  eval_cmd->add_option("--holdout-seed", eval_opt.holdout_seed)->capture_default_str();

  RecommendOptions rec;
  auto* rec_cmd = app.add_subcommand("recommend", "Recommend tests for a partial bag");
  rec_cmd->add_option("--model", rec.model)->required();
  rec_cmd->add_option("--items", rec.items, "Comma-separated item ids or names")->required();
  rec_cmd->add_option("--k", rec.k)->capture_default_str();
  rec_cmd->add_flag("--include-selected", rec.include_selected,
                    "Allow already selected items in the output");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--model", serve.model)->required();
  serve_cmd->add_option("--host", serve.host)->capture_default_str();
  serve_cmd->add_option("--port", serve.port)->capture_default_str();
  serve_cmd->add_option("--static-dir", serve.static_dir, "UI bundle served under /");
  serve_cmd->add_option("--cors-origin", serve.cors_origin, "Allowed CORS origin (dev)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUserError;
  }

  try {
    if (*ingest_cmd) return run_ingest(ingest, out, err);
    if (*fit_cmd) return run_fit(fit_opt, out, err);
    if (*grid_cmd) return run_grid(grid, out, err);
    if (*eval_cmd) return run_evaluate(eval_opt, out, err);
    if (*rec_cmd) return run_recommend(rec, out, err);
    if (*serve_cmd) return run_serve(serve, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return e.is_user_error() ? kExitUserError : kExitInternalError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternalError;
  }
  return kExitInternalError;
}

}  // namespace labrec
