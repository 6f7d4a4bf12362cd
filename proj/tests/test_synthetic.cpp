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

#include <gtest/gtest.h>

#include <set>

#include "segeval/synthetic.hpp"
#include "segeval/table_io.hpp"

using namespace segeval;

namespace {

SceneSpec small_scene(std::uint64_t seed) {
  SceneSpec spec;
  spec.seed = seed;
  spec.extent = 100.0;
  spec.building_count = 4;
  spec.tree_count = 20;
  return spec;
}

MetricsReport evaluate_scene(const SyntheticScene& scene) {
  const EvalContext ctx =
      validate_inputs(scene.cloud, scene.predictions, scene.config.classes, scene.config.thresholds);
  return evaluate(ctx, ScopeSelection::Both, 1, scene.config.name);
}

}  // namespace

TEST(SplitMix64, KnownSequence) {
  // Reference values for seed 0 from the published SplitMix64 generator.
  SplitMix64 rng(0);
  EXPECT_EQ(rng.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(rng.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(rng.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, UniformRange) {
  SplitMix64 rng(5);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(rng.below(7), 7u);
  }
}

TEST(GenerateScene, Reproducible) {
  const SyntheticScene a = generate_scene(small_scene(11));
  const SyntheticScene b = generate_scene(small_scene(11));
  ASSERT_EQ(a.cloud.size(), b.cloud.size());
  for (std::size_t i = 0; i < a.cloud.size(); ++i) {
    ASSERT_EQ(a.cloud.positions[i].x, b.cloud.positions[i].x);
    ASSERT_EQ(a.cloud.positions[i].z, b.cloud.positions[i].z);
  }
  EXPECT_EQ(a.cloud.gt_labels, b.cloud.gt_labels);
  EXPECT_EQ(a.predictions[0].pred_labels, b.predictions[0].pred_labels);
  EXPECT_EQ(a.predictions[1].pred_labels, b.predictions[1].pred_labels);

  const SyntheticScene c = generate_scene(small_scene(12));
  EXPECT_NE(a.cloud.gt_labels, c.cloud.gt_labels);
}

TEST(GenerateScene, ContainsEveryClass) {
  const SyntheticScene s = generate_scene(small_scene(3));
  const std::set<ClassId> seen(s.cloud.gt_labels.begin(), s.cloud.gt_labels.end());
  EXPECT_EQ(seen, (std::set<ClassId>{0, 1, 2}));
  EXPECT_EQ(s.config.classes.names, (std::vector<std::string>{"ground", "vegetation", "building"}));
}

TEST(GenerateScene, EqualIouDifferentDistances) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const SyntheticScene scene = generate_scene(small_scene(seed));
    const MetricsReport report = evaluate_scene(scene);
    const auto& full = report.scopes[0].per_model;
    ASSERT_EQ(full.size(), 2u);
    // Same class pair, same count: identical confusion matrices.
    EXPECT_EQ(full[0].confusion, full[1].confusion) << "seed " << seed;
    EXPECT_EQ(full[0].classification.mean_iou, full[1].classification.mean_iou);
    EXPECT_GT(full[0].confusion.false_positives(2), 0u);

    const auto& boundary = full[0].distance.per_class[2];
    const auto& blob = full[1].distance.per_class[2];
    EXPECT_LT(*boundary.mde, *blob.mde);
    EXPECT_EQ(*boundary.rho, 0.0);
    EXPECT_EQ(*blob.rho, 1.0);
    EXPECT_GE(*full[1].distance.mmde, 2.0 * *full[0].distance.mmde);

    ASSERT_EQ(scene.expected.size(), 2u);
    EXPECT_EQ(scene.expected[0].metric, "mde");
    EXPECT_EQ(scene.expected[0].lower_model, "boundary-confuser");
    EXPECT_EQ(scene.expected[1].metric, "rho");
  }
}

TEST(GenerateScene, ZeroRateGivesPerfectPredictions) {
  SceneSpec spec = small_scene(9);
  for (auto& m : spec.models) m.rate = 0.0;
  const SyntheticScene scene = generate_scene(spec);
  for (const auto& p : scene.predictions) EXPECT_EQ(p.pred_labels, scene.cloud.gt_labels);
  EXPECT_TRUE(scene.expected.empty());
  const MetricsReport report = evaluate_scene(scene);
  EXPECT_EQ(report.scopes[1].scope.selected_count(), 0u);
}

TEST(GenerateScene, SpecErrors) {
  auto kind = [](SceneSpec spec) {
    try {
      generate_scene(spec);
    } catch (const EvalError& e) {
      return e.kind();
    }
    return ErrorKind::IoError;
  };
  SceneSpec s = small_scene(1);
  s.models[0].band = 20.0;  // not below tau_building
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
  s = small_scene(1);
  s.models[1].offset = 5.0;  // not above tau_building
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
  s = small_scene(1);
  s.models[0].rate = 0.9;  // more errors than boundary candidates
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
  s = small_scene(1);
  s.models[0].true_class = "water";
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
  s = small_scene(1);
  s.building_count = 40;
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
  s = small_scene(1);
  s.extent = -1.0;
  EXPECT_EQ(kind(s), ErrorKind::SpecError);
}

TEST(GenerateRandom, ShapeAndErrorRate) {
  SceneSpec spec;
  spec.kind = SceneSpec::Kind::Random;
  spec.extent = 500.0;
  spec.random_points = 20000;
  spec.random_error_rate = 0.1;
  const SyntheticScene scene = generate_scene(spec);
  EXPECT_EQ(scene.cloud.size(), 20000u);
  EXPECT_EQ(scene.config.name, "synthetic-random");
  EXPECT_EQ(scene.config.classes.size(), 8u);
  ASSERT_EQ(scene.predictions.size(), 2u);
  EXPECT_EQ(scene.predictions[1].model_name, "model1");
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < 20000; ++i) wrong += scene.predictions[0].pred_labels[i] != scene.cloud.gt_labels[i];
  EXPECT_NEAR(static_cast<double>(wrong) / 20000.0, 0.1, 0.01);
}

TEST(SceneSpecJson, Parse) {
  const SceneSpec spec = scene_spec_from_json(nlohmann::json::parse(R"({
    "seed": 7, "extent": 80,
    "buildings": {"count": 3},
    "thresholds": {"building": 8},
    "models": [{"name": "a", "kind": "boundary", "rate": 0.01, "band": 1.0}]
  })"));
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.extent, 80.0);
  EXPECT_EQ(spec.building_count, 3);
  EXPECT_EQ(spec.tau_building, 8.0);
  ASSERT_EQ(spec.models.size(), 1u);
  EXPECT_EQ(spec.models[0].kind, ErrorRecipe::Kind::Boundary);
  EXPECT_EQ(spec.models[0].band, 1.0);

  const SceneSpec random = scene_spec_from_json(nlohmann::json{{"kind", "random"}, {"points", 10}, {"classes", 3}});
  EXPECT_EQ(random.kind, SceneSpec::Kind::Random);
  EXPECT_EQ(random.random_classes, 3u);

  EXPECT_THROW(scene_spec_from_json(nlohmann::json{{"kind", "forest"}}), EvalError);
  EXPECT_THROW(scene_spec_from_json(nlohmann::json{{"models", {{{"name", "a"}, {"kind", "smear"}}}}}), EvalError);
  EXPECT_THROW(scene_spec_from_json(nlohmann::json{{"seed", "x"}}), EvalError);
}

TEST(SceneSpecJson, ShippedSceneMatchesDefaults) {
  const std::string text = table::read_file(std::filesystem::path(SEGEVAL_SOURCE_DIR) / "configs" / "scene.json");
  const SyntheticScene shipped = generate_scene(scene_spec_from_json(nlohmann::json::parse(text)));
  const SyntheticScene builtin = generate_scene(SceneSpec{});
  EXPECT_EQ(shipped.cloud.gt_labels, builtin.cloud.gt_labels);
  EXPECT_EQ(shipped.predictions[1].pred_labels, builtin.predictions[1].pred_labels);
}
