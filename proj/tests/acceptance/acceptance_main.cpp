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

// Acceptance suite. Prints one PASS/FAIL line per criterion.
//
//   acceptance [--only core|demo] [--demo-dir DIR]
//
// The demo criteria need the MIMIC-III demo LABEVENTS.csv and D_LABITEMS.csv,
// found through --demo-dir or LABREC_DEMO_DIR. When they are absent those
// criteria print FAIL(blocked) and the process exits with 77, which ctest
// reports as skipped.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "labrec/cli.hpp"
#include "labrec/error.hpp"
#include "labrec/eval.hpp"
#include "labrec/ingest.hpp"
#include "labrec/persistence.hpp"
#include "labrec/recommender.hpp"
#include "synthetic_labs.hpp"

namespace fs = std::filesystem;
using namespace labrec;

namespace {

constexpr int kExitBlocked = 77;

enum class Outcome { kPass, kFail, kBlocked };

struct Tally {
  int passed = 0;
  int failed = 0;
  int blocked = 0;

  void report(std::string_view name, Outcome outcome, std::string_view detail) {
    const char* tag = outcome == Outcome::kPass   ? "PASS"
                      : outcome == Outcome::kFail ? "FAIL"
                                                  : "FAIL(blocked)";
    std::cout << fmt::format("{:<14}{:<22}{}\n", tag, name, detail) << std::flush;
    (outcome == Outcome::kPass   ? passed
     : outcome == Outcome::kFail ? failed
                                 : blocked)++;
  }
  void check(std::string_view name, bool ok, std::string_view detail) {
    report(name, ok ? Outcome::kPass : Outcome::kFail, detail);
  }
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<bool> random_bits(std::mt19937_64& rng, std::size_t n) {
  const double density = static_cast<double>(rng() % 1001) / 1000.0;
  std::vector<bool> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = static_cast<double>(rng() % 1000000) / 1000000.0 < density;
  }
  return out;
}

PackedRow pack(const std::vector<bool>& bits) {
  PackedRow row(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j]) row.set(j);
  }
  return row;
}

void kernel_criterion(Tally& tally) {
  std::mt19937_64 rng(1000);
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    const auto u = random_bits(rng, n);
    const auto v = random_bits(rng, n);
    ContingencyCounts expected;
    expected.n = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (u[j] && v[j]) ++expected.a;
      else if (u[j]) ++expected.b;
      else if (v[j]) ++expected.c;
      else ++expected.d;
    }
    mismatches += contingency(pack(u).view(), pack(v).view()) != expected;
  }

  const ContingencyCounts fixture{1, 1, 1, 1, 4};
  const std::vector<std::pair<MetricKind, double>> expected = {
      {MetricKind::kJaccard, 2.0 / 3.0},
      {MetricKind::kKulsinski, 5.0 / 6.0},
      {MetricKind::kMatching, 1.0 / 2.0},
      {MetricKind::kRogersTanimoto, 2.0 / 3.0},
      {MetricKind::kRussellRao, 3.0 / 4.0}};
  std::string values;
  bool fixture_ok = true;
  for (const auto& [metric, value] : expected) {
    const double got = dissimilarity(metric, fixture);
    fixture_ok = fixture_ok && std::abs(got - value) <= 1e-15;
    values += fmt::format("{}{}={:.6f}", values.empty() ? "" : " ", to_string(metric), got);
  }
  tally.check("kernel", mismatches == 0 && fixture_ok,
              fmt::format("1000 random pairs, {} mismatches; (1,1,1,1): {}",
                          mismatches, values));
}

// Brute force: for each cut-off i <= k, precision@i counted from scratch.
double brute_force_ap(const std::vector<ItemIndex>& rec,
                      const std::vector<ItemIndex>& rel, std::size_t k) {
  const auto relevant = [&](ItemIndex x) {
    return std::count(rel.begin(), rel.end(), x) > 0;
  };
  double total = 0.0;
  for (std::size_t i = 1; i <= std::min(k, rec.size()); ++i) {
    if (!relevant(rec[i - 1])) continue;
    std::size_t hits = 0;
    for (std::size_t j = 0; j < i; ++j) hits += relevant(rec[j]);
    total += static_cast<double>(hits) / static_cast<double>(i);
  }
  return total / static_cast<double>(std::min(rel.size(), k));
}

void metric_oracle_criterion(Tally& tally) {
  std::mt19937_64 rng(2000);
  double worst = 0.0;
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ItemIndex> pool(8);
    for (ItemIndex j = 0; j < 8; ++j) pool[j] = j;
    std::shuffle(pool.begin(), pool.end(), rng);
    const std::vector<ItemIndex> rec(pool.begin(), pool.begin() + rng() % 9);
    std::set<ItemIndex> rel_set;
    const std::size_t rel_size = 1 + rng() % 8;
    while (rel_set.size() < rel_size) rel_set.insert(static_cast<ItemIndex>(rng() % 8));
    const std::vector<ItemIndex> rel(rel_set.begin(), rel_set.end());
    const std::size_t k = 1 + rng() % 8;
    const double got = average_precision_at_k(rec, rel, k).value();
    worst = std::max(worst, std::abs(got - brute_force_ap(rec, rel, k)));
  }
  tally.check("metric-oracle", worst <= 1e-12,
              fmt::format("500 random triples (<= 8 items), max |diff| = {:.3g}", worst));
}

void persistence_criterion(Tally& tally) {
  std::istringstream csv(testing::synthetic_labevents_csv({}));
  const auto raw = extract_bags(parse_labevents(csv).rows);
  const Vocabulary vocab = build_vocabulary(raw);
  const auto bags = index_bags(raw, vocab);
  const FittedModel model = fit(bags, vocab, {20, MetricKind::kJaccard});

  testing::TempDir dir;
  save_model(model, dir / "model.json");
  const FittedModel loaded = load_model(dir / "model.json");

  std::mt19937_64 rng(3000);
  int identical = 0;
  const std::size_t n = vocab.size();
  for (int q = 0; q < 100; ++q) {
    std::set<ItemIndex> items;
    const std::size_t size = 1 + rng() % std::min<std::size_t>(n, 8);
    while (items.size() < size) items.insert(static_cast<ItemIndex>(rng() % n));
    const PackedRow query =
        PackedRow::from_indices(std::vector<ItemIndex>(items.begin(), items.end()), n);
    const bool exclude = q % 2 == 0;
    identical += recommend(model, query, 10, exclude).entries ==
                 recommend(loaded, query, 10, exclude).entries;
  }
  tally.check("persistence", identical == 100,
              fmt::format("{}/100 random queries identical after save/load", identical));
}

struct DemoFiles {
  fs::path labevents;
  fs::path d_labitems;
};

std::optional<DemoFiles> find_demo(const std::string& dir) {
  if (dir.empty()) return std::nullopt;
  auto pick = [&](std::initializer_list<const char*> names) -> fs::path {
    for (const char* name : names) {
      if (fs::is_regular_file(fs::path(dir) / name)) return fs::path(dir) / name;
    }
    return {};
  };
  DemoFiles files{pick({"LABEVENTS.csv", "labevents.csv"}),
                  pick({"D_LABITEMS.csv", "d_labitems.csv"})};
  if (files.labevents.empty() || files.d_labitems.empty()) return std::nullopt;
  return files;
}

// ingest -> fit (split manifest) -> grid-search on train -> evaluate on test,
// all through the CLI. Returns the machine-readable reports.
std::vector<std::string> run_pipeline(const fs::path& labevents,
                                      const fs::path& d_labitems) {
  testing::TempDir dir;
  const std::string bags = (dir / "bags.jsonl").string();
  const std::string model = (dir / "model.json").string();
  const std::string manifest = model + ".split.json";
  const std::vector<std::vector<std::string>> steps = {
      {"ingest", "--labevents", labevents.string(), "--d-labitems",
       d_labitems.string(), "--out", bags},
      {"fit", "--bags", bags, "--out", model, "--seed", "42"},
      {"grid-search", "--bags", bags, "--manifest", manifest, "--seed", "42",
       "--report", (dir / "grid.json").string()},
      {"evaluate", "--model", model, "--bags", bags, "--manifest", manifest,
       "--report", (dir / "eval.json").string()}};
  for (const auto& args : steps) {
    std::ostringstream out, err;
    if (run_cli(args, out, err) != kExitOk) {
      throw std::runtime_error(fmt::format("'{}' failed: {}", args[0], err.str()));
    }
  }
  return {testing::read_text(bags), testing::read_text(manifest),
          testing::read_text(dir / "grid.json"), testing::read_text(dir / "eval.json")};
}

void determinism_criterion(Tally& tally, const std::optional<DemoFiles>& demo) {
  testing::TempDir fixture;
  DemoFiles files;
  std::string source;
  if (demo) {
    files = *demo;
    source = "MIMIC-III demo";
  } else {
    files = {fixture.write("LABEVENTS.csv", testing::synthetic_labevents_csv({})),
             fixture.write("D_LABITEMS.csv", testing::synthetic_d_labitems_csv())};
    source = "synthetic MIMIC-format fixture (demo data absent)";
  }
  try {
    const auto first = run_pipeline(files.labevents, files.d_labitems);
    const auto second = run_pipeline(files.labevents, files.d_labitems);
    const char* names[] = {"bags", "split manifest", "grid report", "evaluation report"};
    std::string differing;
    for (std::size_t i = 0; i < first.size(); ++i) {
      if (first[i] != second[i]) differing += fmt::format(" {}", names[i]);
    }
    tally.check("determinism", differing.empty(),
                differing.empty()
                    ? fmt::format("two seed-42 runs byte-identical on {}", source)
                    : fmt::format("differs on {}:{}", source, differing));
  } catch (const std::exception& e) {
    tally.check("determinism", false, e.what());
  }
}

struct ReferenceCell {
  std::size_t s;
  double jaccard;
};
constexpr ReferenceCell kReferenceJaccard[] = {
    {10, 0.9367}, {20, 0.9412}, {50, 0.9369}, {80, 0.9346}, {100, 0.9338}};

void demo_criteria(Tally& tally, const std::optional<DemoFiles>& demo) {
  if (!demo) {
    const char* why = "MIMIC-III demo CSVs not found (set --demo-dir or LABREC_DEMO_DIR)";
    tally.report("ingestion", Outcome::kBlocked, why);
    tally.report("grid-search", Outcome::kBlocked, why);
    tally.report("test-metrics", Outcome::kBlocked, why);
    return;
  }

  // Ingestion.
  const auto start = std::chrono::steady_clock::now();
  const LabEvents events = parse_labevents(demo->labevents);
  std::vector<RawBag> raw = extract_bags(events.rows, GroupingKey::kSubjectCharttime);
  const auto primary = summarize(events, raw);
  const double ingest_seconds = seconds_since(start);
  std::string detail = fmt::format("subject+charttime: {} patients, {} bags",
                                   primary.distinct_patients, primary.bags);
  bool ingest_ok = primary.distinct_patients == 100 && primary.bags == 1596;
  if (primary.bags != 1596) {
    auto fallback = extract_bags(events.rows, GroupingKey::kSubjectHadmCharttime);
    const auto fb = summarize(events, fallback);
    detail += fmt::format("; subject+hadm+charttime fallback: {} bags", fb.bags);
    const auto off = [](std::size_t bags) {
      return std::abs(static_cast<double>(bags) - 1596.0) / 1596.0;
    };
    if (off(fb.bags) < off(primary.bags)) raw = std::move(fallback);
    ingest_ok = primary.distinct_patients == 100 && off(raw.size()) <= 0.02;
    detail += fmt::format("; using {} bags ({:+.2f}% vs 1596)", raw.size(),
                          100.0 * (static_cast<double>(raw.size()) - 1596.0) / 1596.0);
  }
  detail += fmt::format("; {:.2f}s", ingest_seconds);
  tally.check("ingestion", ingest_ok && ingest_seconds < 10.0, detail);

  // Grid search on the seeded 2/3 train split.
  const Vocabulary vocab = build_vocabulary(raw);
  const auto bags = index_bags(raw, vocab);
  const Split split = train_test_split(bags.size(), {1.0 / 3.0, kDefaultSeed});
  const auto train = gather<Bag>(bags, split.train);
  const auto test = gather<Bag>(bags, split.test);

  const auto grid_start = std::chrono::steady_clock::now();
  const GridResult grid = grid_search(train, vocab, GridSpec{});
  const double grid_seconds = seconds_since(grid_start);

  bool dominates = true;
  bool within = true;
  std::string cells;
  std::size_t argmax_s = 0;
  double max_score = -1.0;
  for (const auto& row : kReferenceJaccard) {
    const double score = grid.cell(MetricKind::kJaccard, row.s).cv.mean;
    for (MetricKind other : kAllMetrics) {
      dominates = dominates && score >= grid.cell(other, row.s).cv.mean;
    }
    within = within && std::abs(score - row.jaccard) <= 0.025;
    if (score > max_score) {
      max_score = score;
      argmax_s = row.s;
    }
    cells += fmt::format(" s={}:{:.2f}%", row.s, 100.0 * score);
  }
  const bool peak_ok = argmax_s == 10 || argmax_s == 20 || argmax_s == 50;
  const bool best_ok = grid.best.metric == MetricKind::kJaccard;
  tally.check("grid-search", best_ok && dominates && peak_ok && within && grid_seconds < 300.0,
              fmt::format("best={} s={}; jaccard dominates={}; jaccard peak s={}; "
                          "cells within 2.5pp={};{}; {:.1f}s",
                          to_string(grid.best.metric), grid.best.s, dominates, argmax_s,
                          within, cells, grid_seconds));

  // Test-set metrics for the selected hyper-parameters.
  const FittedModel model = fit(train, vocab, grid.best);
  const std::vector<std::size_t> ks = {3, 5, 10};
  const auto m = evaluate(model, test, ks);
  const bool map_ok = m[0].map >= 0.93 && m[1].map >= 0.92 && m[2].map >= 0.89;
  const bool mar_ok = m[0].mar >= 0.13 && m[0].mar <= 0.24 && m[2].mar >= 0.25 &&
                      m[2].mar <= 0.37;
  const bool shape_ok = m[0].map >= m[1].map && m[1].map >= m[2].map &&
                        m[0].mar < m[1].mar && m[1].mar < m[2].mar;
  tally.check("test-metrics", map_ok && mar_ok && shape_ok,
              fmt::format("MAP@3/5/10 = {:.2f}/{:.2f}/{:.2f}%; MAR@3/5/10 = "
                          "{:.2f}/{:.2f}/{:.2f}%; thresholds {}, ranges {}, shape {}",
                          100 * m[0].map, 100 * m[1].map, 100 * m[2].map,
                          100 * m[0].mar, 100 * m[1].mar, 100 * m[2].mar,
                          map_ok ? "ok" : "missed", mar_ok ? "ok" : "missed",
                          shape_ok ? "ok" : "broken"));
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  std::string demo_dir;
  if (const char* env = std::getenv("LABREC_DEMO_DIR")) demo_dir = env;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (arg == "--demo-dir" && i + 1 < argc) {
      demo_dir = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only core|demo] [--demo-dir DIR]\n";
      return 2;
    }
  }
  if (!only.empty() && only != "core" && only != "demo") {
    std::cerr << "--only must be core or demo\n";
    return 2;
  }

  const auto demo = find_demo(demo_dir);
  Tally tally;
  try {
    if (only != "demo") {
      kernel_criterion(tally);
      metric_oracle_criterion(tally);
      determinism_criterion(tally, demo);
      persistence_criterion(tally);
    }
    if (only != "core") demo_criteria(tally, demo);
  } catch (const std::exception& e) {
    std::cout << "FAIL          aborted               " << e.what() << '\n';
    return 1;
  }

  std::cout << fmt::format("\n{} passed, {} failed, {} blocked\n", tally.passed,
                           tally.failed, tally.blocked);
  if (tally.failed > 0) return 1;
  if (tally.blocked > 0) return kExitBlocked;
  return 0;
}
