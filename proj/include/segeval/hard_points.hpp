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

#pragma once

/// @file hard_points.hpp
/// @brief The hard-points subset (points misclassified by at least one of
///        the compared models) and scoped evaluation of every model.

#include <cstddef>
#include <string>
#include <vector>

#include "segeval/class_metrics.hpp"
#include "segeval/core.hpp"
#include "segeval/distance_metrics.hpp"
#include "segeval/numeric.hpp"
#include "segeval/scope.hpp"
#include "segeval/spatial_index.hpp"

namespace segeval {

/// mask[i] is true iff some model's prediction at i differs from gt.
inline EvalScope compute_hard_points(const LabeledCloud& cloud, const std::vector<PredictionSet>& preds,
                                     unsigned threads = 1) {
  if (preds.empty()) throw EvalError(ErrorKind::NoModels, "hard points need at least one model");
  const std::size_t n = cloud.size();
  for (const auto& p : preds) {
    if (p.size() != n) throw EvalError(ErrorKind::LengthMismatch, "model '" + p.model_name + "'");
  }
  // vector<bool> packs bits, so workers fill a byte buffer first.
  std::vector<unsigned char> hard(n, 0);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (const auto& p : preds) {
        if (p.pred_labels[i] != cloud.gt_labels[i]) {
          hard[i] = 1;
          break;
        }
      }
    }
  });
  return EvalScope("hard", std::vector<bool>(hard.begin(), hard.end()));
}

struct ModelScopeResult {
  std::string model;
  ConfusionMatrix confusion;
  ClassificationStats classification;
  DistanceStatsBundle distance;
};

struct ScopeReport {
  EvalScope scope;
  std::vector<ModelScopeResult> per_model;
};

/// Everything a report file carries. Thresholds and class names are echoed
/// so results are never read against a different configuration.
struct MetricsReport {
  std::string config_name;
  ClassList classes;
  ThresholdConfig thresholds;
  std::vector<std::string> models;
  std::size_t point_count = 0;
  std::vector<ScopeReport> scopes;
};

/// Per-model distance records over the full cloud, reused by every scope.
struct ModelDistances {
  std::vector<std::vector<PointDistanceRecord>> per_model;
};

inline ModelDistances compute_model_distances(const EvalContext& ctx, const ClassIndexSet& indexes,
                                              unsigned threads = 1) {
  ModelDistances out;
  for (const auto& pred : ctx.predictions) {
    out.per_model.push_back(point_distance_records(ctx.cloud, pred, indexes, ctx.thresholds, threads));
  }
  return out;
}

inline std::vector<ModelScopeResult> evaluate_scoped(const EvalContext& ctx, const ModelDistances& distances,
                                                     const EvalScope& scope, unsigned threads = 1) {
  std::vector<ModelScopeResult> out;
  for (std::size_t m = 0; m < ctx.predictions.size(); ++m) {
    const PredictionSet& pred = ctx.predictions[m];
    ModelScopeResult r;
    r.model = pred.model_name;
    r.confusion = confusion_matrix(ctx.cloud.gt_labels, pred.pred_labels, scope, ctx.class_count(), threads);
    r.classification = classification_stats(r.confusion);
    r.distance = class_distance_stats(distances.per_model.at(m), scope, ctx.class_count());
    out.push_back(std::move(r));
  }
  return out;
}

/// Distance queries consult `indexes`, which must be built over the full
/// cloud regardless of the scope.
inline std::vector<ModelScopeResult> evaluate_scoped(const EvalContext& ctx, const EvalScope& scope,
                                                     const ClassIndexSet& indexes, unsigned threads = 1) {
  return evaluate_scoped(ctx, compute_model_distances(ctx, indexes, threads), scope, threads);
}

enum class ScopeSelection { Full, Hard, Both };

inline std::string_view to_string(ScopeSelection s) noexcept {
  switch (s) {
    case ScopeSelection::Full: return "full";
    case ScopeSelection::Hard: return "hard";
    case ScopeSelection::Both: return "both";
  }
  return "both";
}

/// Full pipeline for a validated context: indexes, per-point distances, and
/// the requested scopes.
inline MetricsReport evaluate(const EvalContext& ctx, ScopeSelection selection, unsigned threads = 1,
                              std::string config_name = {}) {
  MetricsReport report;
  report.config_name = std::move(config_name);
  report.classes = ctx.classes;
  report.thresholds = ctx.thresholds;
  report.point_count = ctx.point_count();
  for (const auto& p : ctx.predictions) report.models.push_back(p.model_name);

  const ClassIndexLists by_gt = partition_by_class(ctx.cloud.gt_labels, ctx.class_count());
  const ClassIndexSet indexes = build_class_indexes(ctx.cloud, by_gt, threads);
  const ModelDistances distances = compute_model_distances(ctx, indexes, threads);

  if (selection != ScopeSelection::Hard) {
    EvalScope full = EvalScope::full(ctx.point_count());
    auto results = evaluate_scoped(ctx, distances, full, threads);
    report.scopes.push_back({std::move(full), std::move(results)});
  }
  if (selection != ScopeSelection::Full) {
    EvalScope hard = compute_hard_points(ctx.cloud, ctx.predictions, threads);
    auto results = evaluate_scoped(ctx, distances, hard, threads);
    report.scopes.push_back({std::move(hard), std::move(results)});
  }
  return report;
}

}  // namespace segeval
