// Copyright 2026 The segeval Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "segeval/segeval.hpp"
#include "segeval/tile_merge.hpp"

using namespace segeval;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SEGEVAL_CLI_PATH) + " " + args + " > /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) { return table::read_file(p); }

ClassIndexSet indexes_for(const LabeledCloud& cloud, std::size_t nc) {
  return build_class_indexes(cloud, partition_by_class(cloud.gt_labels, nc));
}

Outcome oracle_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::size_t queries = 0;
  for (int trial = 0; trial < 50 && o.ok; ++trial) {
    const std::size_t n = 1 + rng() % 2000;
    const std::size_t nc = 3 + rng() % 6;
    auto inst = segeval::testing::random_instance(rng, n, nc, 1, 0.05 + (rng() % 90) / 100.0);
    const auto idx = indexes_for(inst.cloud, nc);
    std::vector<std::vector<Point3>> pts(nc);
    for (std::size_t i = 0; i < n; ++i) pts[inst.cloud.gt_labels[i]].push_back(inst.cloud.positions[i]);
    for (std::size_t i = 0; i < n && o.ok; ++i) {
      for (ClassId c = 0; c < nc; ++c) {
        const double fast = nearest_distance(idx, c, inst.cloud.positions[i]);
        const double slow = segeval::testing::oracle_nearest(pts[c], inst.cloud.positions[i]);
        ++queries;
        const bool same = std::isinf(slow) ? std::isinf(fast) : std::abs(fast - slow) <= 1e-9;
        if (!same) o.fail("trial " + std::to_string(trial) + " point " + std::to_string(i) + " distance differs");
      }
    }
    const auto bundle = class_distance_stats(inst.cloud, inst.preds[0], EvalScope::full(n), idx, inst.thresholds);
    const auto naive =
        segeval::testing::oracle_bundle(inst.cloud, inst.preds[0].pred_labels, std::vector<bool>(n, true), inst.thresholds, nc);
    if (!(bundle == naive)) o.fail("trial " + std::to_string(trial) + " bundle differs from per-point reference");
    if (!(bundle == naive_distance_stats(inst.cloud, inst.preds[0], EvalScope::full(n), inst.thresholds, nc))) {
      o.fail("trial " + std::to_string(trial) + " bundle differs from brute-force evaluator");
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= 60.0) o.fail("took " + fmt("%.1f", secs) + " s");
  if (o.ok) o.detail = "50 clouds, " + std::to_string(queries) + " queries, bundles exact, " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome unit_fixtures() {
  Outcome o;
  {
    LabeledCloud cloud{{{0, 0, 0}, {0, 0.5, 0}, {1, 0, 0}, {-7, 0, 0}, {50, 50, 0}}, {1, 1, 0, 0, 0}};
    PredictionSet pred{"m", {1, 1, 1, 1, 0}, std::nullopt};
    const ThresholdConfig taus({{0, 2.0}, {1, 5.0}});
    const auto b = class_distance_stats(cloud, pred, EvalScope::full(5), indexes_for(cloud, 2), taus);
    const auto& s = b.per_class[1];
    if (!(s.predicted_count == 4 && s.error_count == 2 && s.mde == 1.5 && s.rho == 0.5 && s.mu == 1.0)) {
      o.fail("MDE example");
    }
  }
  {
    LabeledCloud cloud{{{0, 0, 0}}, {0}};
    if (nearest_distance(indexes_for(cloud, 1), 0, {3, 4, 0}) != 5.0) o.fail("3-4-5 distance");
  }
  {
    const auto cm = confusion_matrix({0, 0, 1}, {0, 1, 1}, EvalScope::full(3), 2);
    const auto stats = classification_stats(cm);
    const bool cm_ok = cm.at(0, 0) == 1 && cm.at(0, 1) == 1 && cm.at(1, 0) == 0 && cm.at(1, 1) == 1;
    if (!cm_ok || stats.overall_accuracy != 2.0 / 3.0 || stats.iou_per_class[0] != 0.5 ||
        stats.iou_per_class[1] != 0.5) {
      o.fail("confusion fixture");
    }
  }
  if (o.ok) o.detail = "MDE 1.5 / rho 0.5 / mu 1.0; 3-4-5 -> 5; OA 2/3, IoU 1/2";
  return o;
}

Outcome hard_points_algebra() {
  Outcome o;
  std::mt19937_64 rng(77);
  std::size_t total_hard = 0;
  for (int trial = 0; trial < 100 && o.ok; ++trial) {
    const std::size_t nc = 2 + rng() % 7;
    const std::size_t n = 20 + rng() % 1500;
    auto inst = segeval::testing::random_instance(rng, n, nc, 3, 0.01 + (rng() % 40) / 100.0);
    const EvalContext ctx = validate_inputs(inst.cloud, inst.preds, inst.classes, inst.thresholds);
    const MetricsReport report = evaluate(ctx, ScopeSelection::Both, 1);
    const EvalScope& hard = report.scopes[1].scope;
    total_hard += hard.selected_count();
    for (std::size_t i = 0; i < n; ++i) {
      bool any = false;
      for (const auto& p : ctx.predictions) any = any || p.pred_labels[i] != ctx.cloud.gt_labels[i];
      if (any != hard.contains(i)) o.fail("hard set is not the union of error sets");
    }
    const std::uint64_t h = hard.selected_count();
    for (std::size_t m = 0; m < 3; ++m) {
      const auto& f = report.scopes[0].per_model[m];
      const auto& s = report.scopes[1].per_model[m];
      std::uint64_t errors = 0;
      for (std::size_t i = 0; i < n; ++i) errors += ctx.predictions[m].pred_labels[i] != ctx.cloud.gt_labels[i];
      for (ClassId c = 0; c < nc; ++c) {
        if (f.confusion.false_positives(c) != s.confusion.false_positives(c) ||
            f.confusion.false_negatives(c) != s.confusion.false_negatives(c)) {
          o.fail("FP/FN differ between scopes");
        }
      }
      if (h > 0) {
        if (s.confusion.trace() + errors != h) o.fail("OA_H * |H| + errors != |H|");
        if (s.classification.overall_accuracy != static_cast<double>(h - errors) / static_cast<double>(h)) {
          o.fail("OA_H is not (|H| - errors) / |H|");
        }
      } else if (errors != 0 || s.classification.overall_accuracy) {
        o.fail("empty hard set with errors");
      }
    }
  }
  if (o.ok) o.detail = "100 instances, " + std::to_string(total_hard) + " hard points total";
  return o;
}

Outcome equal_iou_demo() {
  Outcome o;
  const SyntheticScene scene = generate_scene(SceneSpec{});
  const EvalContext ctx = validate_inputs(scene.cloud, scene.predictions, scene.config.classes, scene.config.thresholds);
  const MetricsReport report = evaluate(ctx, ScopeSelection::Both, 1, scene.config.name);
  const auto& a = report.scopes[0].per_model[0];
  const auto& b = report.scopes[0].per_model[1];
  if (!(a.confusion == b.confusion)) o.fail("confusion matrices differ");
  if (a.classification.overall_accuracy != b.classification.overall_accuracy ||
      a.classification.iou_per_class != b.classification.iou_per_class ||
      a.classification.mean_iou != b.classification.mean_iou) {
    o.fail("OA/IoU/mIoU differ");
  }
  const double lo = std::min(*a.distance.mmde, *b.distance.mmde);
  const double hi = std::max(*a.distance.mmde, *b.distance.mmde);
  const ClassId building = 2;
  const double drho = std::abs(*a.distance.per_class[building].rho - *b.distance.per_class[building].rho);
  if (!(hi >= 2.0 * lo)) o.fail("mMDE ratio below 2");
  if (!(drho >= 0.3)) o.fail("rho difference below 0.3");
  if (o.ok) {
    o.detail = std::to_string(scene.cloud.size()) + " points, mIoU " + fmt("%.6f", *a.classification.mean_iou) +
               " both; mMDE " + fmt("%.4f", *a.distance.mmde) + " vs " + fmt("%.4f", *b.distance.mmde) + " (x" +
               fmt("%.1f", hi / lo) + "); building rho " + fmt("%.2f", *a.distance.per_class[building].rho) +
               " vs " + fmt("%.2f", *b.distance.per_class[building].rho);
  }
  return o;
}

Outcome range_invariants() {
  Outcome o;
  std::mt19937_64 rng(1000);
  const int trials = 1000;
  for (int trial = 0; trial < trials && o.ok; ++trial) {
    const std::size_t nc = 2 + rng() % 7;
    const std::size_t n = 10 + rng() % 300;
    const double rate = trial % 10 == 0 ? 0.0 : (rng() % 100) / 100.0;
    auto inst = segeval::testing::random_instance(rng, n, nc, 1, rate);
    const auto idx = indexes_for(inst.cloud, nc);
    const auto records = point_distance_records(inst.cloud, inst.preds[0], idx, inst.thresholds);
    for (const auto& r : records) {
      if (r.clipped_distance > inst.thresholds.at(r.predicted)) o.fail("clipped distance above tau");
    }
    const auto bundle = class_distance_stats(records, EvalScope::full(n), nc);
    bool all_correct = true;
    for (std::size_t i = 0; i < n; ++i) all_correct = all_correct && inst.preds[0].pred_labels[i] == inst.cloud.gt_labels[i];
    for (const auto& s : bundle.per_class) {
      const double tau = inst.thresholds.at(s.class_id);
      if (s.mde && !(*s.mde >= 0.0 && *s.mde <= tau)) o.fail("MDE out of [0, tau]");
      if (s.rho && !(*s.rho >= 0.0 && *s.rho <= 1.0)) o.fail("rho out of [0, 1]");
      if (s.mu && !(*s.mu > 0.0 && *s.mu <= tau)) o.fail("mu out of (0, tau]");
    }
    if (all_correct && bundle.mmde != 0.0) o.fail("all-correct predictions give non-zero mMDE");

    ThresholdConfig doubled;
    for (const auto& [c, t] : inst.thresholds.entries()) doubled.set(c, 2.0 * t);
    const auto wider = class_distance_stats(inst.cloud, inst.preds[0], EvalScope::full(n), idx, doubled);
    for (std::size_t c = 0; c < nc; ++c) {
      const auto& x = bundle.per_class[c];
      const auto& y = wider.per_class[c];
      if (x.mde && *y.mde < *x.mde) o.fail("MDE decreased when tau doubled");
      if (x.rho && *y.rho > *x.rho) o.fail("rho increased when tau doubled");
    }
  }
  if (o.ok) o.detail = std::to_string(trials) + " trials";
  return o;
}

Outcome determinism(const fs::path& tmp) {
  Outcome o;
  SceneSpec spec;
  spec.kind = SceneSpec::Kind::Random;
  spec.extent = 1000.0;
  spec.random_points = 200000;
  spec.seed = 6;
  const SyntheticScene scene = generate_scene(spec);
  write_cloud_file(tmp / "det.csv", scene.cloud, scene.predictions, scene.config.classes.size());
  const std::string base = "evaluate --input " + (tmp / "det.csv").string() + " --config dales --scope both";
  for (int run = 0; run < 2; ++run) {
    for (const char* t : {"1", "8"}) {
      const fs::path out = tmp / ("det_" + std::string(t) + "_" + std::to_string(run) + ".json");
      if (run_cli(base + " --threads " + t + " --output " + out.string()) != 0) o.fail("evaluate failed");
    }
  }
  if (!o.ok) return o;
  const std::string ref = slurp(tmp / "det_1_0.json");
  for (const char* f : {"det_8_0.json", "det_1_1.json", "det_8_1.json"}) {
    if (slurp(tmp / f) != ref) o.fail(std::string(f) + " differs from det_1_0.json");
  }
  if (o.ok) o.detail = "200000 points, threads 1 and 8, two runs each: " + std::to_string(ref.size()) + " identical bytes";
  return o;
}

Outcome tile_merge() {
  Outcome o;
  {
    TileStack stack{2, {}};
    for (const auto& row : {std::vector<double>{0.9, 0.1}, std::vector<double>{0.1, 0.9}}) {
      Tile t;
      t.positions = {{1, 2, 3}};
      t.probabilities["m"] = row;
      stack.tiles.push_back(t);
    }
    if (merge_tile_predictions(stack).predictions[0].pred_labels[0] != 0) o.fail("tie did not resolve to class 0");
  }
  std::mt19937_64 rng(8);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::size_t points = 0;
  for (int trial = 0; trial < 200 && o.ok; ++trial) {
    const std::size_t nc = 2 + rng() % 6;
    TileStack stack{nc, {}};
    const std::size_t tiles = 2 + rng() % 5;
    for (std::size_t t = 0; t < tiles; ++t) {
      Tile tile;
      tile.source = "t" + std::to_string(t);
      auto& probs = tile.probabilities["m"];
      for (int r = 0; r < 30; ++r) {
        tile.positions.push_back({static_cast<double>(rng() % 8), static_cast<double>(rng() % 8), 0.0});
        std::vector<double> row(nc);
        double sum = 0.0;
        for (auto& v : row) sum += (v = gamma(rng));
        for (auto& v : row) probs.push_back(v / sum);
      }
      stack.tiles.push_back(std::move(tile));
    }
    const MergeResult merged = merge_tile_predictions(stack);
    const auto& pred = merged.predictions[0];
    for (std::size_t i = 0; i < merged.positions.size(); ++i) {
      // Recompute the mean row independently and take its argmax.
      std::vector<double> sum(nc, 0.0);
      std::size_t count = 0;
      for (const Tile& t : stack.tiles) {
        for (std::size_t r = 0; r < t.positions.size(); ++r) {
          const Point3& p = t.positions[r];
          if (p.x != merged.positions[i].x || p.y != merged.positions[i].y || p.z != merged.positions[i].z) continue;
          for (std::size_t c = 0; c < nc; ++c) sum[c] += t.probabilities.at("m")[r * nc + c];
          ++count;
        }
      }
      std::size_t best = 0;
      for (std::size_t c = 1; c < nc; ++c) {
        if (sum[c] > sum[best]) best = c;
      }
      const double margin = sum[best] / static_cast<double>(count);
      const double chosen = sum[pred.pred_labels[i]] / static_cast<double>(count);
      // Exact argmax unless two classes tie to within rounding.
      if (pred.pred_labels[i] != best && margin - chosen > 1e-12) o.fail("label is not the argmax of the mean row");
      ++points;
    }
  }
  if (o.ok) o.detail = "tie -> class 0; 200 random stacks, " + std::to_string(points) + " merged points";
  return o;
}

Outcome performance(const fs::path& tmp) {
  Outcome o;
  SceneSpec spec;
  spec.kind = SceneSpec::Kind::Random;
  spec.extent = 1000.0;
  spec.random_points = 1000000;
  spec.random_classes = 8;
  spec.random_models = 2;
  spec.seed = 8;
  const SyntheticScene scene = generate_scene(spec);
  write_cloud_file(tmp / "perf.csv", scene.cloud, scene.predictions, 8);
  const auto t0 = Clock::now();
  const int code = run_cli("evaluate --input " + (tmp / "perf.csv").string() +
                           " --config dales --scope both --output " + (tmp / "perf.json").string());
  const double secs = seconds_since(t0);
  if (code != 0) o.fail("evaluate exited with " + std::to_string(code));
  if (secs >= 30.0) o.fail("took " + fmt("%.1f", secs) + " s");
  const double rate = 1e6 / secs;
  const std::string detail = "1000000 points x 2 models, scope both: " + fmt("%.2f", secs) + " s on " +
                             std::to_string(resolve_threads(0)) + " hardware thread(s), " + fmt("%.0f", rate) +
                             " points/s; linear extrapolation to 966.30M points: " + fmt("%.0f", 966.30e6 / rate) +
                             " s";
  if (o.ok) o.detail = detail;
  return o;
}

}  // namespace

int main() {
  const fs::path tmp = segeval::testing::temp_dir("acceptance");
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"oracle equivalence", oracle_equivalence},
      {"hand-computed fixtures", unit_fixtures},
      {"hard-points algebra", hard_points_algebra},
      {"equal IoU, different mMDE", equal_iou_demo},
      {"clipping and range invariants", range_invariants},
      {"thread-count determinism", [&] { return determinism(tmp); }},
      {"tile-merge correctness", tile_merge},
      {"1M-point performance", [&] { return performance(tmp); }},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failures += !o.ok;
    std::cout << (o.ok ? "PASS" : "FAIL") << " [" << k + 1 << "] " << criteria[k].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
