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

/// @file spatial_index.hpp
/// @brief Per-class nearest-neighbor indexes over ground-truth points.
///
/// One kd-tree per declared class, built over X_{y=c}. Queries return the
/// exact Euclidean distance to the nearest ground-truth point of the queried
/// class, or +inf when that class has no ground-truth points in the scene.

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "segeval/core.hpp"
#include "segeval/kdtree.hpp"
#include "segeval/numeric.hpp"

namespace segeval {

inline constexpr double kInfiniteDistance = std::numeric_limits<double>::infinity();

class ClassIndexSet {
 public:
  ClassIndexSet() = default;

  std::size_t class_count() const noexcept { return trees_.size(); }

  /// Number of indexed points for class c; 0 is the empty marker.
  std::size_t size(ClassId c) const {
    check(c);
    return trees_[c].size();
  }

  bool empty(ClassId c) const {
    check(c);
    return trees_[c].empty();
  }

  double nearest_squared(ClassId c, const Point3& q) const {
    check(c);
    return trees_[c].nearest_squared(q);
  }

  /// Moves one indexed point of the first non-empty class by one meter. Used
  /// only as a negative control for the oracle check.
  void corrupt_for_testing() {
    for (auto& tree : trees_) {
      if (!tree.empty()) {
        for (auto& p : tree.mutable_points()) p.x += 1.0;
        return;
      }
    }
  }

 private:
  friend ClassIndexSet build_class_indexes(const LabeledCloud&, const ClassIndexLists&, unsigned);

  void check(ClassId c) const {
    if (c >= trees_.size()) {
      throw EvalError(ErrorKind::UnknownClass, "no index for class " + std::to_string(c));
    }
  }

  std::vector<KdTree3> trees_;
};

/// Builds one index per entry of by_gt (one per declared class). Classes are
/// built concurrently when threads > 1.
inline ClassIndexSet build_class_indexes(const LabeledCloud& cloud, const ClassIndexLists& by_gt,
                                         unsigned threads = 1) {
  ClassIndexSet set;
  set.trees_.resize(by_gt.size());
  auto build_one = [&](std::size_t c) {
    std::vector<Point3> pts;
    pts.reserve(by_gt[c].size());
    for (std::size_t i : by_gt[c]) pts.push_back(cloud.positions[i]);
    set.trees_[c] = KdTree3(pts);
  };
  if (threads <= 1 || by_gt.size() <= 1) {
    for (std::size_t c = 0; c < by_gt.size(); ++c) build_one(c);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(by_gt.size());
    const std::size_t workers = std::min<std::size_t>(threads, by_gt.size());
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t c = w; c < by_gt.size(); c += workers) {
          try {
            build_one(c);
          } catch (...) {
            errors[c] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  return set;
}

inline double nearest_distance(const ClassIndexSet& indexes, ClassId c, const Point3& query) {
  const double sq = indexes.nearest_squared(c, query);
  return std::isinf(sq) ? kInfiniteDistance : std::sqrt(sq);
}

/// Linear-scan reference for nearest_distance.
inline double brute_force_nearest(std::span<const Point3> points, const Point3& query) noexcept {
  double best = kInfiniteDistance;
  for (const Point3& p : points) best = std::min(best, squared_distance(query, p));
  return std::isinf(best) ? kInfiniteDistance : std::sqrt(best);
}

}  // namespace segeval
