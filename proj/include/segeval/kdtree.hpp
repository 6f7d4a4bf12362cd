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

/// @file kdtree.hpp
/// @brief Static 3D kd-tree answering exact nearest-distance queries.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "segeval/core.hpp"

namespace segeval {

class KdTree3 {
 public:
  static constexpr std::size_t kLeafSize = 12;

  KdTree3() = default;

  explicit KdTree3(std::span<const Point3> points) : points_(points.begin(), points.end()) {
    if (!points_.empty()) {
      nodes_.reserve(2 * points_.size() / kLeafSize + 1);
      build(0, points_.size());
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Exact minimum squared distance from q to the stored points, +inf when
  /// the tree is empty. Pruning uses the same squared_distance arithmetic as a
  /// linear scan, so the result is bitwise identical to one.
  double nearest_squared(const Point3& q) const noexcept {
    double best = std::numeric_limits<double>::infinity();
    if (!nodes_.empty()) search(0, q, best);
    return best;
  }

  /// Stored points in tree order; exposed for tests and fault injection.
  std::vector<Point3>& mutable_points() noexcept { return points_; }
  const std::vector<Point3>& points() const noexcept { return points_; }

 private:
  struct Node {
    std::uint32_t begin;
    std::uint32_t end;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::uint8_t axis = 0;
    double split = 0.0;
  };

  static double coord(const Point3& p, int axis) noexcept {
    return axis == 0 ? p.x : (axis == 1 ? p.y : p.z);
  }

  std::int32_t build(std::size_t begin, std::size_t end) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{static_cast<std::uint32_t>(begin), static_cast<std::uint32_t>(end)});
    if (end - begin <= kLeafSize) return id;

    std::array<double, 3> lo{points_[begin].x, points_[begin].y, points_[begin].z};
    std::array<double, 3> hi = lo;
    for (std::size_t i = begin + 1; i < end; ++i) {
      for (int a = 0; a < 3; ++a) {
        lo[a] = std::min(lo[a], coord(points_[i], a));
        hi[a] = std::max(hi[a], coord(points_[i], a));
      }
    }
    int axis = 0;
    for (int a = 1; a < 3; ++a) {
      if (hi[a] - lo[a] > hi[axis] - lo[axis]) axis = a;
    }
    // All points coincide: splitting would not separate anything.
    if (hi[axis] == lo[axis]) return id;

    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(points_.begin() + begin, points_.begin() + mid, points_.begin() + end,
                     [axis](const Point3& a, const Point3& b) { return coord(a, axis) < coord(b, axis); });
    const double split = coord(points_[mid], axis);
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    Node& node = nodes_[id];
    node.axis = static_cast<std::uint8_t>(axis);
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  void search(std::int32_t id, const Point3& q, double& best) const noexcept {
    const Node& node = nodes_[id];
    if (node.left < 0) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        best = std::min(best, squared_distance(q, points_[i]));
      }
      return;
    }
    // left holds coordinates <= split, right holds coordinates >= split.
    const double diff = coord(q, node.axis) - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, q, best);
    if (diff * diff < best) search(far, q, best);
  }

  std::vector<Point3> points_;
  std::vector<Node> nodes_;
};

}  // namespace segeval
