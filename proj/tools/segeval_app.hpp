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

// Command-line front end. Exit codes: 0 success, 1 validation failure,
// 2 I/O failure, 3 oracle mismatch.

#include <glob.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "segeval/segeval.hpp"

namespace segeval::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitOracle = 3;

inline int exit_code_for(const EvalError& e) { return e.kind() == ErrorKind::IoError ? kExitIo : kExitValidation; }

/// A config argument is a file path, or a preset name when no such file
/// exists.
inline EvalConfig resolve_config(const std::string& arg) {
  if (!std::filesystem::exists(arg)) {
    const auto& presets = preset_names();
    if (std::find(presets.begin(), presets.end(), arg) != presets.end()) return preset_config(arg);
    // A bare word is a misspelled preset rather than a missing file.
    const std::filesystem::path path(arg);
    if (!path.has_parent_path() && !path.has_extension()) return preset_config(arg);
  }
  return load_config(arg);
}

inline std::vector<std::string> expand_inputs(const std::vector<std::string>& patterns) {
  std::vector<std::string> files;
  for (const auto& pattern : patterns) {
    glob_t g{};
    const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
    if (rc == 0) {
      std::vector<std::string> matched(g.gl_pathv, g.gl_pathv + g.gl_pathc);
      std::sort(matched.begin(), matched.end());
      files.insert(files.end(), matched.begin(), matched.end());
    }
    ::globfree(&g);
    if (rc == GLOB_NOMATCH) throw EvalError(ErrorKind::IoError, "no files match '" + pattern + "'");
    if (rc != 0) throw EvalError(ErrorKind::IoError, "cannot expand '" + pattern + "'");
  }
  return files;
}

struct EvaluateOptions {
  std::string input;
  std::string config;
  std::string scope;
  std::string output;
  std::string format;
  unsigned threads = 0;
  std::string export_hard_mask;
};

inline int cmd_evaluate(const EvaluateOptions& opt, std::ostream& out, bool color) {
  const EvalConfig cfg = resolve_config(opt.config);
  const ScopeSelection selection =
      !opt.scope.empty() ? parse_scope(opt.scope) : cfg.scope.value_or(ScopeSelection::Both);
  std::string format = opt.format;
  if (format.empty()) format = std::filesystem::path(opt.output).extension() == ".csv" ? "csv" : "json";
  const ReportFormat report_format = parse_report_format(format);
  const unsigned threads = resolve_threads(opt.threads);

  ParsedInput input = parse_cloud_file(opt.input, cfg.classes, cfg.thresholds, cfg.models);
  const EvalContext& ctx = input.context;
  const MetricsReport report = evaluate(ctx, selection, threads, cfg.name);

  if (!opt.output.empty()) emit_report(report, opt.output, report_format);
  if (!opt.export_hard_mask.empty()) {
    const EvalScope hard = compute_hard_points(ctx.cloud, ctx.predictions, threads);
    write_cloud_file(opt.export_hard_mask, ctx.cloud, ctx.predictions, ctx.class_count(), &hard.mask());
  }
  print_summary(out, report, color);
  return kExitOk;
}

struct MergeOptions {
  std::vector<std::string> inputs;
  std::string config;
  std::string output;
  unsigned threads = 0;
};

inline int cmd_merge_tiles(const MergeOptions& opt, std::ostream& out, std::ostream& err) {
  const EvalConfig cfg = resolve_config(opt.config);
  const std::vector<std::string> files = expand_inputs(opt.inputs);
  TileStack stack;
  stack.n_classes = cfg.classes.size();
  for (const auto& f : files) stack.tiles.push_back(parse_tile_file(f, stack.n_classes));
  const MergeResult merged = merge_tile_predictions(stack, resolve_threads(opt.threads));

  LabeledCloud cloud;
  cloud.positions = merged.positions;
  if (merged.gt) cloud.gt_labels = *merged.gt;
  table::write_file(opt.output, format_cloud(cloud, merged.predictions, stack.n_classes, nullptr, ',', merged.gt.has_value()));

  const MergeDiagnostics& d = merged.diagnostics;
  err << "merged " << d.tile_count << " tiles: " << d.row_count << " rows, " << d.unique_points << " points, "
      << d.duplicate_rows << " duplicate rows, " << d.gt_conflicts << " ground-truth conflicts, " << d.near_miss_pairs
      << " near-miss pairs (< " << d.near_miss_radius << " m, not bitwise equal)\n";
  if (!merged.gt) err << "warning: not every tile has a gt column; output has no gt column\n";
  out << opt.output << "\n";
  return kExitOk;
}

struct GenerateOptions {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::string output_dir;
};

inline int cmd_generate(const GenerateOptions& opt, std::ostream& out) {
  SceneSpec spec;
  if (!opt.spec.empty()) {
    const std::string text = table::read_file(opt.spec);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw EvalError(ErrorKind::SpecError, opt.spec + ": " + e.what());
    }
    spec = scene_spec_from_json(j);
  }
  if (opt.seed) spec.seed = *opt.seed;
  const SyntheticScene scene = generate_scene(spec);

  const std::filesystem::path dir(opt.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw EvalError(ErrorKind::IoError, "cannot create " + dir.string() + ": " + ec.message());
  write_cloud_file(dir / "scene.csv", scene.cloud, scene.predictions, scene.config.classes.size());
  save_config(scene.config, dir / "config.json");
  nlohmann::json expected = nlohmann::json::array();
  for (const auto& e : scene.expected) {
    expected.push_back({{"metric", e.metric}, {"class", e.class_name}, {"lower", e.lower_model}, {"higher", e.higher_model}});
  }
  table::write_file(dir / "expected.json", nlohmann::json{{"seed", spec.seed}, {"orderings", expected}}.dump(2) + "\n");
  out << "wrote " << scene.cloud.size() << " points, " << scene.predictions.size() << " models to " << dir.string()
      << "\n";
  return kExitOk;
}

struct OracleOptions {
  std::string input;
  std::string config;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  bool inject_index_fault = false;
};

inline constexpr std::size_t kOracleMaxPoints = 200000;
inline constexpr double kOracleTolerance = 1e-9;

inline int cmd_oracle_check(const OracleOptions& opt, std::ostream& out, std::ostream& err) {
  const EvalConfig cfg = resolve_config(opt.config);
  const ParsedInput input = parse_cloud_file(opt.input, cfg.classes, cfg.thresholds, cfg.models);
  const EvalContext& ctx = input.context;
  const std::size_t n = ctx.point_count();
  if (n > kOracleMaxPoints) {
    err << "oracle-check supports at most " << kOracleMaxPoints << " points (got " << n << ")\n";
    return kExitValidation;
  }
  const unsigned threads = resolve_threads(opt.threads);
  const ClassIndexLists by_gt = partition_by_class(ctx.cloud.gt_labels, ctx.class_count());
  ClassIndexSet indexes = build_class_indexes(ctx.cloud, by_gt, threads);
  if (opt.inject_index_fault) indexes.corrupt_for_testing();

  // Sample without replacement.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  const std::size_t k = std::min(opt.samples, n);
  SplitMix64 rng(opt.seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < k; ++i) mask[order[i]] = true;
  const EvalScope sample("sample", mask);

  std::vector<std::vector<Point3>> gt_points(ctx.class_count());
  for (std::size_t i = 0; i < n; ++i) gt_points[ctx.cloud.gt_labels[i]].push_back(ctx.cloud.positions[i]);

  std::size_t queries = 0;
  for (const auto& pred : ctx.predictions) {
    for (std::size_t s = 0; s < k; ++s) {
      const std::size_t i = order[s];
      const ClassId c = pred.pred_labels[i];
      const double fast = nearest_distance(indexes, c, ctx.cloud.positions[i]);
      const double slow = brute_force_nearest(gt_points[c], ctx.cloud.positions[i]);
      ++queries;
      const bool same = (std::isinf(fast) && std::isinf(slow)) || std::abs(fast - slow) <= kOracleTolerance;
      if (!same) {
        const Point3& p = ctx.cloud.positions[i];
        err << "oracle mismatch: model '" << pred.model_name << "' point " << i << " (" << p.x << ", " << p.y << ", "
            << p.z << ") class " << c << ": indexed " << fast << " m, brute force " << slow << " m\n";
        return kExitOracle;
      }
    }
    const auto records = point_distance_records(ctx.cloud, pred, indexes, ctx.thresholds, threads);
    const DistanceStatsBundle fast = class_distance_stats(records, sample, ctx.class_count());
    const DistanceStatsBundle slow = naive_distance_stats(ctx.cloud, pred, sample, ctx.thresholds, ctx.class_count());
    auto close = [](const std::optional<double>& a, const std::optional<double>& b) {
      return a.has_value() == b.has_value() && (!a || std::abs(*a - *b) <= kOracleTolerance);
    };
    bool ok = close(fast.mmde, slow.mmde) && fast.mmde_defined_classes == slow.mmde_defined_classes;
    for (std::size_t c = 0; ok && c < fast.per_class.size(); ++c) {
      const auto& a = fast.per_class[c];
      const auto& b = slow.per_class[c];
      ok = a.predicted_count == b.predicted_count && a.error_count == b.error_count &&
           a.distant_count == b.distant_count && a.near_count == b.near_count && close(a.mde, b.mde) &&
           close(a.rho, b.rho) && close(a.mu, b.mu);
      if (!ok) err << "oracle mismatch: model '" << pred.model_name << "' class " << c << " statistics differ\n";
    }
    if (!ok) {
      if (fast.per_class.empty()) err << "oracle mismatch: model '" << pred.model_name << "' mMDE differs\n";
      return kExitOracle;
    }
  }
  out << "oracle-check passed: " << queries << " nearest-distance queries and " << ctx.predictions.size()
      << " metric bundles over " << k << " sampled points\n";
  return kExitOk;
}

inline bool stdout_color() {
  return std::getenv("NO_COLOR") == nullptr && ::isatty(STDOUT_FILENO) == 1;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
               bool color = false) {
  CLI::App cli{"Spatially-aware evaluation of point-cloud semantic segmentation", "segeval"};
  cli.require_subcommand(1, 1);

  EvaluateOptions ev;
  auto* evaluate_cmd = cli.add_subcommand("evaluate", "Classification and distance metrics on the full set and/or hard points");
  evaluate_cmd->add_option("--input", ev.input, "Point table with x,y,z,gt,pred_<model> columns")->required();
  evaluate_cmd->add_option("--config", ev.config, "Config JSON file or preset name (dales, fractal, tracasa-pna20)")->required();
  evaluate_cmd->add_option("--scope", ev.scope, "full, hard or both (default: config, else both)")
      ->check(CLI::IsMember({"full", "hard", "both"}));
  evaluate_cmd->add_option("--output", ev.output, "Report path");
  evaluate_cmd->add_option("--format", ev.format, "json or csv (default from --output extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  evaluate_cmd->add_option("--threads", ev.threads, "Worker threads (0 = all cores)");
  evaluate_cmd->add_option("--export-hard-mask", ev.export_hard_mask, "Write the input table with a hard column");

  MergeOptions mg;
  auto* merge_cmd = cli.add_subcommand("merge-tiles", "Merge overlapping tile predictions by averaging probabilities");
  merge_cmd->add_option("--inputs", mg.inputs, "Tile tables (glob patterns allowed)")->required();
  merge_cmd->add_option("--config", mg.config, "Config JSON file or preset name")->required();
  merge_cmd->add_option("--output", mg.output, "Merged table path")->required();
  merge_cmd->add_option("--threads", mg.threads, "Worker threads (0 = all cores)");

  GenerateOptions gen;
  std::uint64_t seed = 0;
  auto* generate_cmd = cli.add_subcommand("generate", "Write a deterministic synthetic scene and config");
  generate_cmd->add_option("--spec", gen.spec, "Scene spec JSON (default: built-in equal-IoU scene)");
  auto* seed_opt = generate_cmd->add_option("--seed", seed, "Overrides the spec seed");
  generate_cmd->add_option("--output-dir", gen.output_dir, "Output directory")->required();

  OracleOptions orc;
  auto* oracle_cmd = cli.add_subcommand("oracle-check", "Cross-check indexed metrics against brute force");
  oracle_cmd->add_option("--input", orc.input, "Point table")->required();
  oracle_cmd->add_option("--config", orc.config, "Config JSON file or preset name")->required();
  oracle_cmd->add_option("--samples", orc.samples, "Number of sampled points");
  oracle_cmd->add_option("--seed", orc.seed, "Sampling seed");
  oracle_cmd->add_option("--threads", orc.threads, "Worker threads (0 = all cores)");
  oracle_cmd->add_flag("--inject-index-fault", orc.inject_index_fault, "Corrupt the index (negative control)")
      ->group("");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return cli.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*evaluate_cmd) return cmd_evaluate(ev, out, color);
    if (*merge_cmd) return cmd_merge_tiles(mg, out, err);
    if (*generate_cmd) {
      if (*seed_opt) gen.seed = seed;
      return cmd_generate(gen, out);
    }
    if (*oracle_cmd) return cmd_oracle_check(orc, out, err);
  } catch (const EvalError& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace segeval::app
