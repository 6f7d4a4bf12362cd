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

/// @file synthetic.hpp
/// @brief Deterministic synthetic scenes and predictions with controlled
///        error geometry.
///
/// Random numbers come from SplitMix64 (Steele, Lea, Flood 2014):
///
///     state += 0x9E3779B97F4A7C15
///     z = state
///     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///     return z ^ (z >> 31)
///
/// seeded with state = seed. uniform() is (next() >> 11) * 2^-53 and
/// below(n) is next() % n. Generation uses only +, -, *, / and sqrt on
/// doubles, so a given seed yields bit-identical scenes on any IEEE-754
/// platform.
///
/// Two scene kinds exist. "scene" builds ground, box buildings and tree
/// clusters, and each synthetic model flips a fixed number of points of one
/// true class to another predicted class:
///   boundary  picks points within `band` meters of the predicted class
///             (band < tau, so every error is near);
///   blob      picks a compact cluster of points farther than `offset`
///             meters from the predicted class (offset > tau, so every
///             error is distant).
/// Recipes with the same rate flip the same number of points, so their
/// confusion matrices are identical while their distance metrics are not.
/// "random" builds a large uniformly scattered cloud with spatially blocky
/// labels and random flips, for scale testing.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segeval/config.hpp"
#include "segeval/core.hpp"
#include "segeval/spatial_index.hpp"

namespace segeval {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform-ish in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept { return next() % n; }

 private:
  std::uint64_t state_;
};

struct ErrorRecipe {
  enum class Kind { None, Boundary, Blob };

  std::string model_name;
  Kind kind = Kind::None;
  std::string true_class = "ground";
  std::string pred_class = "building";
  double rate = 0.0;    // fraction of true_class points flipped
  double band = 1.5;    // boundary: max distance to pred_class ground truth
  double offset = 15.0; // blob: min distance to pred_class ground truth
};

struct SceneSpec {
  enum class Kind { Scene, Random };

  Kind kind = Kind::Scene;
  std::uint64_t seed = 1;

  // kind == Scene
  double extent = 160.0;
  double ground_spacing = 1.0;
  int building_count = 8;
  double building_min_size = 12.0;
  double building_max_size = 24.0;
  double building_min_height = 6.0;
  double building_max_height = 15.0;
  int tree_count = 60;
  int tree_points = 80;
  double tree_min_radius = 1.5;
  double tree_max_radius = 3.5;
  double tau_ground = 2.0;
  double tau_vegetation = 3.0;
  double tau_building = 10.0;
  std::vector<ErrorRecipe> models{
      {"boundary-confuser", ErrorRecipe::Kind::Boundary, "ground", "building", 0.02, 1.5, 15.0},
      {"blob-confuser", ErrorRecipe::Kind::Blob, "ground", "building", 0.02, 1.5, 15.0},
  };

  // kind == Random
  std::size_t random_points = 100000;
  std::size_t random_classes = 8;
  std::size_t random_models = 2;
  double random_cell = 20.0;
  double random_error_rate = 0.05;
};

/// A qualitative expectation the generator guarantees by construction.
struct ExpectedOrdering {
  std::string metric;    // "mde" or "rho"
  std::string class_name;
  std::string lower_model;
  std::string higher_model;
};

struct SyntheticScene {
  EvalConfig config;
  LabeledCloud cloud;
  std::vector<PredictionSet> predictions;
  std::vector<ExpectedOrdering> expected;
};

namespace detail {

struct Box {
  double x0, y0, x1, y1, height;
};

inline std::size_t class_by_name(const ClassList& classes, const std::string& name) {
  for (std::size_t c = 0; c < classes.size(); ++c) {
    if (classes.names[c] == name) return c;
  }
  throw EvalError(ErrorKind::SpecError, "unknown class '" + name + "' in error recipe");
}

inline void check_spec(const SceneSpec& spec) {
  auto fail = [](const std::string& what) { throw EvalError(ErrorKind::SpecError, what); };
  if (!(spec.extent > 0.0) || !std::isfinite(spec.extent)) fail("extent must be > 0");
  if (spec.kind == SceneSpec::Kind::Random) {
    if (spec.random_points == 0) fail("points must be > 0");
    if (spec.random_classes < 2) fail("classes must be >= 2");
    if (spec.random_models == 0) fail("models must be >= 1");
    if (!(spec.random_cell > 0.0)) fail("cell must be > 0");
    if (!(spec.random_error_rate >= 0.0 && spec.random_error_rate <= 1.0)) fail("error_rate must be in [0, 1]");
    return;
  }
  if (!(spec.ground_spacing > 0.0) || spec.ground_spacing >= spec.extent) fail("ground_spacing must be in (0, extent)");
  if (spec.building_count < 0 || spec.tree_count < 0 || spec.tree_points < 0) fail("counts must be >= 0");
  if (!(spec.building_min_size > 0.0) || spec.building_max_size < spec.building_min_size) fail("building sizes");
  if (spec.building_max_size * 2.0 >= spec.extent && spec.building_count > 0) fail("buildings do not fit the extent");
  if (!(spec.building_min_height > 0.0) || spec.building_max_height < spec.building_min_height) fail("building heights");
  if (!(spec.tree_min_radius > 0.0) || spec.tree_max_radius < spec.tree_min_radius) fail("tree radii");
  for (const auto& r : spec.models) {
    if (r.model_name.empty()) fail("model name must be non-empty");
    if (!(r.rate >= 0.0 && r.rate <= 1.0)) fail("rate must be in [0, 1] for model '" + r.model_name + "'");
  }
}

inline SyntheticScene generate_random(const SceneSpec& spec) {
  SyntheticScene scene;
  const std::size_t nc = spec.random_classes;
  if (nc == 8) {
    scene.config = preset_config("dales");
  } else {
    for (std::size_t c = 0; c < nc; ++c) {
      scene.config.classes.names.push_back("class" + std::to_string(c));
      scene.config.thresholds.set(static_cast<ClassId>(c), 5.0);
    }
  }
  scene.config.name = "synthetic-random";

  SplitMix64 rng(spec.seed);
  const std::size_t cells = static_cast<std::size_t>(std::ceil(spec.extent / spec.random_cell));
  std::vector<ClassId> cell_class(cells * cells);
  for (auto& c : cell_class) c = static_cast<ClassId>(rng.below(nc));

  LabeledCloud& cloud = scene.cloud;
  cloud.positions.reserve(spec.random_points);
  cloud.gt_labels.reserve(spec.random_points);
  for (std::size_t i = 0; i < spec.random_points; ++i) {
    const Point3 p{rng.uniform(0.0, spec.extent), rng.uniform(0.0, spec.extent), rng.uniform(0.0, 30.0)};
    const auto cx = std::min(cells - 1, static_cast<std::size_t>(p.x / spec.random_cell));
    const auto cy = std::min(cells - 1, static_cast<std::size_t>(p.y / spec.random_cell));
    cloud.positions.push_back(p);
    cloud.gt_labels.push_back(cell_class[cy * cells + cx]);
  }
  for (std::size_t m = 0; m < spec.random_models; ++m) {
    PredictionSet pred;
    pred.model_name = "model" + std::to_string(m);
    pred.pred_labels = cloud.gt_labels;
    for (auto& label : pred.pred_labels) {
      if (rng.uniform() < spec.random_error_rate) {
        label = static_cast<ClassId>((label + 1 + rng.below(nc - 1)) % nc);
      }
    }
    scene.predictions.push_back(std::move(pred));
  }
  return scene;
}

}  // namespace detail

inline SyntheticScene generate_scene(const SceneSpec& spec) {
  detail::check_spec(spec);
  if (spec.kind == SceneSpec::Kind::Random) return detail::generate_random(spec);

  SyntheticScene scene;
  scene.config.name = "synthetic-scene";
  scene.config.classes.names = {"ground", "vegetation", "building"};
  scene.config.thresholds.set(0, spec.tau_ground);
  scene.config.thresholds.set(1, spec.tau_vegetation);
  scene.config.thresholds.set(2, spec.tau_building);
  constexpr ClassId kGround = 0, kVegetation = 1, kBuilding = 2;

  SplitMix64 rng(spec.seed);
  const double s = spec.ground_spacing;

  // Buildings: axis-aligned boxes with a clearance gap between them.
  std::vector<detail::Box> boxes;
  const double gap = 2.0 * spec.building_min_size;
  for (int b = 0; b < spec.building_count; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      const double w = rng.uniform(spec.building_min_size, spec.building_max_size);
      const double d = rng.uniform(spec.building_min_size, spec.building_max_size);
      const double h = rng.uniform(spec.building_min_height, spec.building_max_height);
      const double x0 = rng.uniform(s, spec.extent - w - s);
      const double y0 = rng.uniform(s, spec.extent - d - s);
      const detail::Box box{x0, y0, x0 + w, y0 + d, h};
      placed = std::none_of(boxes.begin(), boxes.end(), [&](const detail::Box& o) {
        return box.x0 < o.x1 + gap && o.x0 < box.x1 + gap && box.y0 < o.y1 + gap && o.y0 < box.y1 + gap;
      });
      if (placed) boxes.push_back(box);
    }
    if (!placed) throw EvalError(ErrorKind::SpecError, "cannot place " + std::to_string(spec.building_count) + " buildings");
  }
  auto inside_footprint = [&](double x, double y, double margin) {
    return std::any_of(boxes.begin(), boxes.end(), [&](const detail::Box& b) {
      return x >= b.x0 - margin && x <= b.x1 + margin && y >= b.y0 - margin && y <= b.y1 + margin;
    });
  };

  LabeledCloud& cloud = scene.cloud;
  auto add = [&](Point3 p, ClassId c) {
    cloud.positions.push_back(p);
    cloud.gt_labels.push_back(c);
  };

  // Ground grid with small height noise; no ground under roofs.
  const auto steps = static_cast<std::size_t>(std::floor(spec.extent / s));
  for (std::size_t iy = 0; iy <= steps; ++iy) {
    for (std::size_t ix = 0; ix <= steps; ++ix) {
      const double x = static_cast<double>(ix) * s;
      const double y = static_cast<double>(iy) * s;
      const double z = rng.uniform(-0.05, 0.05);
      if (!inside_footprint(x, y, 0.0)) add({x, y, z}, kGround);
    }
  }

  // Roofs and walls sampled on a grid of the same spacing.
  for (const auto& b : boxes) {
    const double w = b.x1 - b.x0, d = b.y1 - b.y0;
    const auto nx = static_cast<std::size_t>(std::ceil(w / s));
    const auto ny = static_cast<std::size_t>(std::ceil(d / s));
    const auto nz = static_cast<std::size_t>(std::ceil(b.height / s));
    for (std::size_t j = 0; j <= ny; ++j) {
      for (std::size_t i = 0; i <= nx; ++i) {
        add({b.x0 + w * static_cast<double>(i) / static_cast<double>(nx),
             b.y0 + d * static_cast<double>(j) / static_cast<double>(ny), b.height},
            kBuilding);
      }
    }
    for (std::size_t k = 0; k < nz; ++k) {
      const double z = b.height * (static_cast<double>(k) + 0.5) / static_cast<double>(nz);
      for (std::size_t i = 0; i <= nx; ++i) {
        const double x = b.x0 + w * static_cast<double>(i) / static_cast<double>(nx);
        add({x, b.y0, z}, kBuilding);
        add({x, b.y1, z}, kBuilding);
      }
      for (std::size_t j = 1; j < ny; ++j) {
        const double y = b.y0 + d * static_cast<double>(j) / static_cast<double>(ny);
        add({b.x0, y, z}, kBuilding);
        add({b.x1, y, z}, kBuilding);
      }
    }
  }

  // Trees: spherical crowns away from buildings.
  for (int t = 0; t < spec.tree_count; ++t) {
    const double r = rng.uniform(spec.tree_min_radius, spec.tree_max_radius);
    double cx = 0.0, cy = 0.0;
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      cx = rng.uniform(r, spec.extent - r);
      cy = rng.uniform(r, spec.extent - r);
      placed = !inside_footprint(cx, cy, r + 2.0);
    }
    if (!placed) throw EvalError(ErrorKind::SpecError, "cannot place trees away from buildings");
    const double cz = r + rng.uniform(1.5, 6.0);
    for (int k = 0; k < spec.tree_points;) {
      const double dx = rng.uniform(-r, r), dy = rng.uniform(-r, r), dz = rng.uniform(-r, r);
      if (dx * dx + dy * dy + dz * dz > r * r) continue;
      add({cx + dx, cy + dy, cz + dz}, kVegetation);
      ++k;
    }
  }

  const ClassIndexLists by_gt = partition_by_class(cloud.gt_labels, scene.config.classes.size());
  const ClassIndexSet indexes = build_class_indexes(cloud, by_gt);

  for (const ErrorRecipe& recipe : spec.models) {
    PredictionSet pred;
    pred.model_name = recipe.model_name;
    pred.pred_labels = cloud.gt_labels;
    const auto from = static_cast<ClassId>(detail::class_by_name(scene.config.classes, recipe.true_class));
    const auto to = static_cast<ClassId>(detail::class_by_name(scene.config.classes, recipe.pred_class));
    const double tau = scene.config.thresholds.at(to);
    const std::size_t count =
        static_cast<std::size_t>(std::llround(recipe.rate * static_cast<double>(by_gt[from].size())));

    if (recipe.kind == ErrorRecipe::Kind::Boundary && !(recipe.band > 0.0 && recipe.band < tau)) {
      throw EvalError(ErrorKind::SpecError, "boundary band must be in (0, tau) for '" + recipe.model_name + "'");
    }
    if (recipe.kind == ErrorRecipe::Kind::Blob && !(recipe.offset > tau)) {
      throw EvalError(ErrorKind::SpecError, "blob offset must exceed tau for '" + recipe.model_name + "'");
    }
    if (recipe.kind != ErrorRecipe::Kind::None && count > 0) {
      if (from == to) throw EvalError(ErrorKind::SpecError, "recipe '" + recipe.model_name + "' flips a class to itself");
      std::vector<std::size_t> candidates;
      std::vector<std::size_t> chosen;
      if (recipe.kind == ErrorRecipe::Kind::Boundary) {
        for (std::size_t i : by_gt[from]) {
          if (nearest_distance(indexes, to, cloud.positions[i]) <= recipe.band) candidates.push_back(i);
        }
        if (candidates.size() < count) {
          throw EvalError(ErrorKind::SpecError, "only " + std::to_string(candidates.size()) +
                                                    " boundary candidates for " + std::to_string(count) + " errors");
        }
        for (std::size_t k = 0; k < count; ++k) {
          const std::size_t j = k + rng.below(candidates.size() - k);
          std::swap(candidates[k], candidates[j]);
        }
        chosen.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count));
      } else {
        for (std::size_t i : by_gt[from]) {
          if (nearest_distance(indexes, to, cloud.positions[i]) > recipe.offset) candidates.push_back(i);
        }
        if (candidates.size() < count) {
          throw EvalError(ErrorKind::SpecError, "only " + std::to_string(candidates.size()) +
                                                    " blob candidates for " + std::to_string(count) + " errors");
        }
        const Point3 center = cloud.positions[candidates[rng.below(candidates.size())]];
        std::stable_sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
          return squared_distance(cloud.positions[a], center) < squared_distance(cloud.positions[b], center);
        });
        chosen.assign(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(count));
      }
      std::sort(chosen.begin(), chosen.end());
      for (std::size_t i : chosen) pred.pred_labels[i] = to;
    }
    scene.predictions.push_back(std::move(pred));
  }

  // Orderings guaranteed when a boundary and a blob recipe flip the same
  // class pair at the same rate.
  for (const auto& a : spec.models) {
    for (const auto& b : spec.models) {
      if (a.kind == ErrorRecipe::Kind::Boundary && b.kind == ErrorRecipe::Kind::Blob && a.rate == b.rate &&
          a.rate > 0.0 && a.true_class == b.true_class && a.pred_class == b.pred_class) {
        scene.expected.push_back({"mde", a.pred_class, a.model_name, b.model_name});
        scene.expected.push_back({"rho", a.pred_class, a.model_name, b.model_name});
      }
    }
  }
  return scene;
}

inline std::string to_string(ErrorRecipe::Kind k) {
  switch (k) {
    case ErrorRecipe::Kind::None: return "none";
    case ErrorRecipe::Kind::Boundary: return "boundary";
    case ErrorRecipe::Kind::Blob: return "blob";
  }
  return "none";
}

inline SceneSpec scene_spec_from_json(const nlohmann::json& j) {
  try {
    SceneSpec spec;
    const std::string kind = j.value("kind", std::string("scene"));
    if (kind == "random") {
      spec.kind = SceneSpec::Kind::Random;
      spec.extent = 1000.0;
    } else if (kind != "scene") {
      throw EvalError(ErrorKind::SpecError, "kind must be scene or random");
    }
    spec.seed = j.value("seed", spec.seed);
    spec.extent = j.value("extent", spec.extent);
    spec.ground_spacing = j.value("ground_spacing", spec.ground_spacing);
    if (j.contains("buildings")) {
      const auto& b = j.at("buildings");
      spec.building_count = b.value("count", spec.building_count);
      spec.building_min_size = b.value("min_size", spec.building_min_size);
      spec.building_max_size = b.value("max_size", spec.building_max_size);
      spec.building_min_height = b.value("min_height", spec.building_min_height);
      spec.building_max_height = b.value("max_height", spec.building_max_height);
    }
    if (j.contains("trees")) {
      const auto& t = j.at("trees");
      spec.tree_count = t.value("count", spec.tree_count);
      spec.tree_points = t.value("points", spec.tree_points);
      spec.tree_min_radius = t.value("min_radius", spec.tree_min_radius);
      spec.tree_max_radius = t.value("max_radius", spec.tree_max_radius);
    }
    if (j.contains("thresholds")) {
      const auto& t = j.at("thresholds");
      spec.tau_ground = t.value("ground", spec.tau_ground);
      spec.tau_vegetation = t.value("vegetation", spec.tau_vegetation);
      spec.tau_building = t.value("building", spec.tau_building);
    }
    if (j.contains("models")) {
      spec.models.clear();
      for (const auto& m : j.at("models")) {
        ErrorRecipe r;
        r.model_name = m.at("name").get<std::string>();
        const std::string k = m.value("kind", std::string("none"));
        if (k == "boundary") {
          r.kind = ErrorRecipe::Kind::Boundary;
        } else if (k == "blob") {
          r.kind = ErrorRecipe::Kind::Blob;
        } else if (k == "none") {
          r.kind = ErrorRecipe::Kind::None;
        } else {
          throw EvalError(ErrorKind::SpecError, "unknown recipe kind '" + k + "'");
        }
        r.true_class = m.value("true_class", r.true_class);
        r.pred_class = m.value("pred_class", r.pred_class);
        r.rate = m.value("rate", r.rate);
        r.band = m.value("band", r.band);
        r.offset = m.value("offset", r.offset);
        spec.models.push_back(std::move(r));
      }
    }
    spec.random_points = j.value("points", spec.random_points);
    spec.random_classes = j.value("classes", spec.random_classes);
    spec.random_models = j.value("model_count", spec.random_models);
    spec.random_cell = j.value("cell", spec.random_cell);
    spec.random_error_rate = j.value("error_rate", spec.random_error_rate);
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(ErrorKind::SpecError, e.what());
  }
}

}  // namespace segeval
