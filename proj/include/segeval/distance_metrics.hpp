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

/// @file distance_metrics.hpp
/// @brief Clipped nearest-neighbor error distances and the per-class
///        MDE / rho / mu statistics with the macro mMDE.
///
/// For a point predicted as class c the raw error distance is the distance
/// to the nearest ground-truth point of class c in the full scene (zero when
/// the prediction is correct, +inf when class c has no ground truth at all).
/// The clipped distance caps it at tau_c. An error is "distant" when its raw
/// distance exceeds tau_c and "near" otherwise.
///
/// Per-point records are computed once over the whole cloud and never depend
/// on the evaluation scope; only the aggregation step reads the scope mask.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "segeval/core.hpp"
#include "segeval/numeric.hpp"
#include "segeval/scope.hpp"
#include "segeval/spatial_index.hpp"

namespace segeval {

struct PointDistanceRecord {
  std::size_t index = 0;
  ClassId predicted = 0;
  double raw_distance = 0.0;
  double clipped_distance = 0.0;
  bool is_error = false;
  bool is_distant = false;

  friend bool operator==(const PointDistanceRecord&, const PointDistanceRecord&) = default;
};

struct ClassDistanceStats {
  ClassId class_id = 0;
  std::uint64_t predicted_count = 0;
  std::uint64_t error_count = 0;
  std::uint64_t distant_count = 0;
  std::uint64_t near_count = 0;
  std::optional<double> mde;
  std::optional<double> rho;
  std::optional<double> mu;

  friend bool operator==(const ClassDistanceStats&, const ClassDistanceStats&) = default;
};

struct DistanceStatsBundle {
  std::vector<ClassDistanceStats> per_class;
  std::optional<double> mmde;
  std::size_t mmde_defined_classes = 0;

  friend bool operator==(const DistanceStatsBundle&, const DistanceStatsBundle&) = default;
};

/// `indexes` must cover the full cloud's ground truth, never a scoped subset.
inline double raw_error_distance(std::size_t point_index, ClassId pred, const LabeledCloud& cloud,
                                 const ClassIndexSet& indexes) {
  if (pred >= indexes.class_count()) {
    throw EvalError(ErrorKind::UnknownClass, "predicted class " + std::to_string(pred));
  }
  if (cloud.gt_labels[point_index] == pred) return 0.0;
  return nearest_distance(indexes, pred, cloud.positions[point_index]);
}

inline double clip_distance(double raw, double tau) noexcept { return std::min(raw, tau); }

/// sum / count, capped at the largest summed term. The cap only matters when
/// rounding pushes the quotient past it (three distant errors: 3 * tau / 3
/// can land one ulp above tau).
inline double bounded_mean(double sum, std::uint64_t count, double max_term) noexcept {
  return std::min(sum / static_cast<double>(count), max_term);
}

/// Distance records for every point of the cloud, in index order.
inline std::vector<PointDistanceRecord> point_distance_records(const LabeledCloud& cloud,
                                                               const PredictionSet& pred,
                                                               const ClassIndexSet& indexes,
                                                               const ThresholdConfig& thresholds,
                                                               unsigned threads = 1) {
  const std::size_t n = cloud.size();
  if (pred.size() != n) throw EvalError(ErrorKind::LengthMismatch, "prediction length");

  // Resolve thresholds up front so a missing one fails before any work.
  std::vector<double> tau(indexes.class_count(), 0.0);
  std::vector<bool> used(indexes.class_count(), false);
  for (ClassId c : pred.pred_labels) {
    if (c >= tau.size()) throw EvalError(ErrorKind::UnknownClass, "predicted class " + std::to_string(c));
    used[c] = true;
  }
  for (ClassId c = 0; c < tau.size(); ++c) {
    if (used[c]) tau[c] = thresholds.at(c);
  }

  std::vector<PointDistanceRecord> records(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      PointDistanceRecord& r = records[i];
      r.index = i;
      r.predicted = pred.pred_labels[i];
      r.is_error = cloud.gt_labels[i] != r.predicted;
      if (!r.is_error) continue;
      const double t = tau[r.predicted];
      r.raw_distance = nearest_distance(indexes, r.predicted, cloud.positions[i]);
      r.clipped_distance = clip_distance(r.raw_distance, t);
      r.is_distant = r.raw_distance > t;
    }
  });
  return records;
}

/// Aggregates records over the scope. Sums run in index order with
/// compensation, so the result does not depend on how records were produced.
inline DistanceStatsBundle class_distance_stats(const std::vector<PointDistanceRecord>& records,
                                                const EvalScope& scope, std::size_t n_classes) {
  if (scope.size() != records.size()) throw EvalError(ErrorKind::LengthMismatch, "scope length");

  DistanceStatsBundle bundle;
  bundle.per_class.resize(n_classes);
  std::vector<CompensatedSum> clipped_sum(n_classes);
  std::vector<CompensatedSum> near_sum(n_classes);
  std::vector<double> clipped_max(n_classes, 0.0), near_max(n_classes, 0.0);
  for (ClassId c = 0; c < n_classes; ++c) bundle.per_class[c].class_id = c;

  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!scope.contains(i)) continue;
    const PointDistanceRecord& r = records[i];
    ClassDistanceStats& s = bundle.per_class.at(r.predicted);
    ++s.predicted_count;
    if (!r.is_error) continue;  // contributes d = 0
    clipped_sum[r.predicted].add(r.clipped_distance);
    clipped_max[r.predicted] = std::max(clipped_max[r.predicted], r.clipped_distance);
    ++s.error_count;
    if (r.is_distant) {
      ++s.distant_count;
    } else {
      ++s.near_count;
      near_sum[r.predicted].add(r.clipped_distance);
      near_max[r.predicted] = std::max(near_max[r.predicted], r.clipped_distance);
    }
  }

  CompensatedSum mde_sum;
  for (ClassId c = 0; c < n_classes; ++c) {
    ClassDistanceStats& s = bundle.per_class[c];
    if (s.predicted_count > 0) {
      s.mde = bounded_mean(clipped_sum[c].value(), s.predicted_count, clipped_max[c]);
      mde_sum.add(*s.mde);
      ++bundle.mmde_defined_classes;
    }
    if (s.error_count > 0) {
      s.rho = static_cast<double>(s.distant_count) / static_cast<double>(s.error_count);
    }
    if (s.near_count > 0) s.mu = bounded_mean(near_sum[c].value(), s.near_count, near_max[c]);
  }
  if (bundle.mmde_defined_classes > 0) {
    bundle.mmde = mde_sum.value() / static_cast<double>(bundle.mmde_defined_classes);
  }
  return bundle;
}

inline DistanceStatsBundle class_distance_stats(const LabeledCloud& cloud, const PredictionSet& pred,
                                                const EvalScope& scope, const ClassIndexSet& indexes,
                                                const ThresholdConfig& thresholds, unsigned threads = 1) {
  return class_distance_stats(point_distance_records(cloud, pred, indexes, thresholds, threads), scope,
                              indexes.class_count());
}

}  // namespace segeval
