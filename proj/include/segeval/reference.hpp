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

/// @file reference.hpp
/// @brief Naive per-point metric computation for runtime self-checks.
///
/// No spatial index and no precomputed records: every error point scans
/// the ground truth of its predicted class linearly. Cost is O(N * |X_c|),
/// so callers restrict the scope to a sample.

#include <algorithm>
#include <cstddef>
#include <vector>

#include "segeval/distance_metrics.hpp"
#include "segeval/numeric.hpp"
#include "segeval/scope.hpp"

namespace segeval {

inline DistanceStatsBundle naive_distance_stats(const LabeledCloud& cloud, const PredictionSet& pred,
                                                const EvalScope& scope, const ThresholdConfig& thresholds,
                                                std::size_t n_classes) {
  std::vector<std::vector<Point3>> gt_points(n_classes);
  for (std::size_t i = 0; i < cloud.size(); ++i) gt_points[cloud.gt_labels[i]].push_back(cloud.positions[i]);

  DistanceStatsBundle bundle;
  CompensatedSum mde_sum;
  for (ClassId c = 0; c < n_classes; ++c) {
    ClassDistanceStats s;
    s.class_id = c;
    CompensatedSum clipped, near;
    double clipped_max = 0.0, near_max = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (!scope.contains(i) || pred.pred_labels[i] != c) continue;
      ++s.predicted_count;
      if (cloud.gt_labels[i] == c) continue;
      const double tau = thresholds.at(c);
      const double raw = brute_force_nearest(gt_points[c], cloud.positions[i]);
      const double d = raw < tau ? raw : tau;
      ++s.error_count;
      clipped.add(d);
      clipped_max = std::max(clipped_max, d);
      if (raw > tau) {
        ++s.distant_count;
      } else {
        ++s.near_count;
        near.add(d);
        near_max = std::max(near_max, d);
      }
    }
    if (s.predicted_count) {
      s.mde = bounded_mean(clipped.value(), s.predicted_count, clipped_max);
      mde_sum.add(*s.mde);
      ++bundle.mmde_defined_classes;
    }
    if (s.error_count) s.rho = static_cast<double>(s.distant_count) / static_cast<double>(s.error_count);
    if (s.near_count) s.mu = bounded_mean(near.value(), s.near_count, near_max);
    bundle.per_class.push_back(s);
  }
  if (bundle.mmde_defined_classes) bundle.mmde = mde_sum.value() / static_cast<double>(bundle.mmde_defined_classes);
  return bundle;
}

}  // namespace segeval
