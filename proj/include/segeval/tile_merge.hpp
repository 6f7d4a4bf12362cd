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

/// @file tile_merge.hpp
/// @brief Merges predictions of points covered by overlapping tiles.
///
/// A point duplicated across k tiles carries k probability rows per model.
/// The merged label is the argmax of the per-class mean of those rows, ties
/// going to the lowest class id. Points are identified across tiles by their
/// exact (x, y, z) bit patterns after adding the tile origin.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "segeval/core.hpp"
#include "segeval/numeric.hpp"
#include "segeval/table_io.hpp"

namespace segeval {

struct Tile {
  std::string source;
  Point3 origin;                              // added to every local position
  std::vector<Point3> positions;              // tile-local
  std::optional<std::vector<ClassId>> gt;
  std::map<std::string, std::vector<double>> probabilities;  // model -> rows x n_classes
};

struct TileStack {
  std::size_t n_classes = 0;
  std::vector<Tile> tiles;
};

struct MergeDiagnostics {
  std::size_t tile_count = 0;
  std::size_t row_count = 0;
  std::size_t unique_points = 0;
  std::size_t duplicate_rows = 0;
  std::size_t gt_conflicts = 0;
  /// Pairs of distinct merged points closer than near_miss_radius: likely
  /// the same physical point written with different rounding.
  std::size_t near_miss_pairs = 0;
  double near_miss_radius = 1e-6;
};

struct MergeResult {
  std::vector<Point3> positions;               // first-appearance order
  std::optional<std::vector<ClassId>> gt;       // present when every tile has gt
  std::vector<PredictionSet> predictions;       // labels plus mean probabilities
  MergeDiagnostics diagnostics;
};

namespace detail {

struct PointKey {
  std::uint64_t x, y, z;
  friend bool operator==(const PointKey&, const PointKey&) = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept {
    std::uint64_t h = k.x * 0x9E3779B97F4A7C15ULL;
    h ^= k.y + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= k.z + 0x94D049BB133111EBULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

inline PointKey key_of(const Point3& p) noexcept {
  // +0.0 and -0.0 name the same location.
  auto bits = [](double v) { return std::bit_cast<std::uint64_t>(v == 0.0 ? 0.0 : v); };
  return {bits(p.x), bits(p.y), bits(p.z)};
}

inline std::size_t count_near_misses(std::vector<Point3> pts, double radius) {
  std::sort(pts.begin(), pts.end(), [](const Point3& a, const Point3& b) {
    if (a.x != b.x) return a.x < b.x;
    if (a.y != b.y) return a.y < b.y;
    return a.z < b.z;
  });
  const double r2 = radius * radius;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size() && pts[j].x - pts[i].x <= radius; ++j) {
      if (squared_distance(pts[i], pts[j]) <= r2) ++pairs;
    }
  }
  return pairs;
}

}  // namespace detail

/// Index of the largest entry; the first (lowest class id) wins ties.
inline ClassId argmax_lowest(const double* row, std::size_t n) noexcept {
  std::size_t best = 0;
  for (std::size_t c = 1; c < n; ++c) {
    if (row[c] > row[best]) best = c;
  }
  return static_cast<ClassId>(best);
}

inline MergeResult merge_tile_predictions(const TileStack& stack, unsigned threads = 1) {
  const std::size_t nc = stack.n_classes;
  if (nc == 0) throw EvalError(ErrorKind::ConfigError, "tile stack declares no classes");

  MergeResult result;
  MergeDiagnostics& diag = result.diagnostics;
  diag.tile_count = stack.tiles.size();

  std::vector<std::string> models;
  for (const auto& tile : stack.tiles) {
    for (const auto& [m, probs] : tile.probabilities) {
      if (std::find(models.begin(), models.end(), m) == models.end()) models.push_back(m);
      if (probs.size() != tile.positions.size() * nc) {
        throw EvalError(ErrorKind::InvalidDistribution,
                        tile.source + ": model '" + m + "' probability matrix does not match tile size");
      }
    }
  }
  std::sort(models.begin(), models.end());
  if (models.empty()) throw EvalError(ErrorKind::MissingProbabilities, "no probability columns in any tile");

  // Global ids in first-appearance order.
  std::unordered_map<detail::PointKey, std::uint32_t, detail::PointKeyHash> ids;
  std::vector<std::vector<std::uint32_t>> gid(stack.tiles.size());
  bool all_gt = !stack.tiles.empty();
  std::vector<ClassId> gt;
  for (std::size_t t = 0; t < stack.tiles.size(); ++t) {
    const Tile& tile = stack.tiles[t];
    all_gt = all_gt && tile.gt.has_value();
    gid[t].resize(tile.positions.size());
    for (std::size_t r = 0; r < tile.positions.size(); ++r) {
      const Point3& local = tile.positions[r];
      const Point3 p{local.x + tile.origin.x, local.y + tile.origin.y, local.z + tile.origin.z};
      auto [it, inserted] = ids.emplace(detail::key_of(p), static_cast<std::uint32_t>(result.positions.size()));
      if (inserted) {
        result.positions.push_back(p);
        gt.push_back(tile.gt ? (*tile.gt)[r] : 0);
      } else {
        ++diag.duplicate_rows;
        if (tile.gt && (*tile.gt)[r] != gt[it->second]) ++diag.gt_conflicts;
      }
      gid[t][r] = it->second;
      ++diag.row_count;
    }
  }
  const std::size_t n = result.positions.size();
  diag.unique_points = n;
  if (all_gt) result.gt = std::move(gt);

  // Occurrences per global point, grouped by point (CSR layout).
  std::vector<std::uint32_t> offsets(n + 1, 0);
  for (const auto& g : gid) {
    for (std::uint32_t id : g) ++offsets[id + 1];
  }
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  std::vector<std::pair<std::uint32_t, std::uint32_t>> occ(offsets[n]);
  {
    std::vector<std::uint32_t> fill(offsets.begin(), offsets.end() - 1);
    for (std::uint32_t t = 0; t < gid.size(); ++t) {
      for (std::uint32_t r = 0; r < gid[t].size(); ++r) occ[fill[gid[t][r]]++] = {t, r};
    }
  }

  for (const std::string& model : models) {
    PredictionSet pred;
    pred.model_name = model;
    pred.pred_labels.resize(n);
    pred.probabilities.emplace(n * nc, 0.0);
    std::vector<const std::vector<double>*> tile_probs(stack.tiles.size(), nullptr);
    for (std::size_t t = 0; t < stack.tiles.size(); ++t) {
      auto it = stack.tiles[t].probabilities.find(model);
      if (it != stack.tiles[t].probabilities.end()) tile_probs[t] = &it->second;
    }
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
      std::vector<double> column;
      for (std::size_t i = begin; i < end; ++i) {
        // Validate rows and gather them.
        std::vector<const double*> rows;
        for (std::uint32_t k = offsets[i]; k < offsets[i + 1]; ++k) {
          const auto [t, r] = occ[k];
          if (!tile_probs[t]) continue;
          const double* row = tile_probs[t]->data() + static_cast<std::size_t>(r) * nc;
          CompensatedSum sum;
          for (std::size_t c = 0; c < nc; ++c) {
            if (!std::isfinite(row[c]) || row[c] < 0.0) {
              throw EvalError(ErrorKind::InvalidDistribution, stack.tiles[t].source + ": model '" + model +
                                                                  "' row " + std::to_string(r + 1) +
                                                                  " has an invalid probability");
            }
            sum.add(row[c]);
          }
          if (std::abs(sum.value() - 1.0) > 1e-6) {
            throw EvalError(ErrorKind::InvalidDistribution, stack.tiles[t].source + ": model '" + model +
                                                                "' row " + std::to_string(r + 1) + " sums to " +
                                                                std::to_string(sum.value()));
          }
          rows.push_back(row);
        }
        if (rows.empty()) {
          throw EvalError(ErrorKind::MissingProbabilities, "model '" + model + "' has no probabilities for merged point " +
                                                               std::to_string(i));
        }
        double* mean = pred.probabilities->data() + i * nc;
        for (std::size_t c = 0; c < nc; ++c) {
          // Sorting the operands makes the sum independent of tile order.
          column.clear();
          for (const double* row : rows) column.push_back(row[c]);
          std::sort(column.begin(), column.end());
          CompensatedSum sum;
          for (double v : column) sum.add(v);
          mean[c] = sum.value() / static_cast<double>(rows.size());
        }
        pred.pred_labels[i] = argmax_lowest(mean, nc);
      }
    });
    result.predictions.push_back(std::move(pred));
  }

  diag.near_miss_pairs = detail::count_near_misses(result.positions, diag.near_miss_radius);
  return result;
}

/// Reads one tile table: x, y, z, optional gt, and prob_<model>_<id> columns.
/// pred_ columns are ignored; merged labels come from probabilities only.
inline Tile parse_tile_text(std::string_view text, std::size_t n_classes, const std::string& source = "<tile>") {
  const table::Layout layout = table::parse_header(table::header_line(text, source), source);
  Tile tile;
  tile.source = source;
  std::vector<std::pair<std::string, std::vector<std::size_t>>> cols;
  for (const auto& model : layout.prob_models) {
    const auto& by_class = layout.prob.at(model);
    std::vector<std::size_t> c_cols;
    for (ClassId c = 0; c < n_classes; ++c) {
      auto it = by_class.find(c);
      if (it == by_class.end()) {
        throw EvalError(ErrorKind::MissingProbabilities,
                        source + ": model '" + model + "' lacks prob_" + model + "_" + std::to_string(c));
      }
      c_cols.push_back(it->second);
    }
    for (const auto& [c, col] : by_class) {
      if (c >= n_classes) {
        throw EvalError(ErrorKind::UnknownClass, table::location(source, 1, col) + ": class " + std::to_string(c));
      }
    }
    cols.emplace_back(model, std::move(c_cols));
    tile.probabilities[model];
  }
  if (layout.gt) tile.gt.emplace();
  table::for_each_row(text, layout, source, [&](std::size_t line, const std::vector<std::string_view>& f) {
    Point3 p{table::parse_double(f[*layout.x], table::location(source, line, *layout.x)),
             table::parse_double(f[*layout.y], table::location(source, line, *layout.y)),
             table::parse_double(f[*layout.z], table::location(source, line, *layout.z))};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw EvalError(ErrorKind::NonFiniteCoordinate, source + ":" + std::to_string(line));
    }
    tile.positions.push_back(p);
    if (tile.gt) {
      const ClassId c = table::parse_label(f[*layout.gt], table::location(source, line, *layout.gt));
      if (c >= n_classes) {
        throw EvalError(ErrorKind::UnknownClass, table::location(source, line, *layout.gt) + ": class " + std::to_string(c));
      }
      tile.gt->push_back(c);
    }
    for (const auto& [model, c_cols] : cols) {
      auto& probs = tile.probabilities[model];
      for (std::size_t col : c_cols) probs.push_back(table::parse_double(f[col], table::location(source, line, col)));
    }
  });
  return tile;
}

inline Tile parse_tile_file(const std::filesystem::path& path, std::size_t n_classes) {
  const std::string text = table::read_file(path);
  return parse_tile_text(text, n_classes, path.string());
}

}  // namespace segeval
