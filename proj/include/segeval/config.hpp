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

/// @file config.hpp
/// @brief Evaluation configuration: declared classes with their clipping
///        thresholds, optional model selection and scope.
///
/// Config files are JSON documents:
///
///     {
///       "name": "dales",
///       "classes": [ {"id": 0, "name": "ground", "tau": 2.0}, ... ],
///       "models": ["kpconv", "ptv3"],      // optional
///       "scope": "both"                    // optional: full | hard | both
///     }
///
/// or {"preset": "dales"} to use one of the built-in threshold tables.

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "segeval/core.hpp"
#include "segeval/hard_points.hpp"

namespace segeval {

struct EvalConfig {
  std::string name;
  ClassList classes;
  ThresholdConfig thresholds;
  std::vector<std::string> models;  // empty: every model in the input
  std::optional<ScopeSelection> scope;
};

namespace detail {

inline EvalConfig make_preset(std::string name, std::vector<std::pair<std::string, double>> table) {
  EvalConfig cfg;
  cfg.name = std::move(name);
  for (std::size_t c = 0; c < table.size(); ++c) {
    cfg.classes.names.push_back(table[c].first);
    cfg.thresholds.set(static_cast<ClassId>(c), table[c].second);
  }
  return cfg;
}

}  // namespace detail

inline const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"dales", "fractal", "tracasa-pna20"};
  return names;
}

/// Built-in class lists and thresholds (meters) for the three aerial LiDAR
/// benchmarks.
inline EvalConfig preset_config(const std::string& name) {
  if (name == "dales") {
    return detail::make_preset(name, {{"ground", 2.0},
                                      {"vegetation", 3.0},
                                      {"buildings", 10.0},
                                      {"cars", 5.0},
                                      {"trucks", 5.0},
                                      {"power_lines", 5.0},
                                      {"fences", 5.0},
                                      {"poles", 5.0}});
  }
  if (name == "fractal") {
    return detail::make_preset(name, {{"ground", 2.0},
                                      {"vegetation", 3.0},
                                      {"building", 10.0},
                                      {"water", 10.0},
                                      {"bridge", 5.0},
                                      {"permanent_structure", 10.0},
                                      {"other", 10.0}});
  }
  if (name == "tracasa-pna20") {
    return detail::make_preset(name, {{"ground", 2.0},
                                      {"low_vegetation", 2.0},
                                      {"med_high_vegetation", 5.0},
                                      {"building", 10.0},
                                      {"vehicle", 5.0}});
  }
  throw EvalError(ErrorKind::ConfigError, "unknown preset '" + name + "'");
}

inline ScopeSelection parse_scope(const std::string& s) {
  if (s == "full") return ScopeSelection::Full;
  if (s == "hard") return ScopeSelection::Hard;
  if (s == "both") return ScopeSelection::Both;
  throw EvalError(ErrorKind::ConfigError, "scope must be full, hard or both (got '" + s + "')");
}

inline EvalConfig config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw EvalError(ErrorKind::ConfigError, "config must be a JSON object");
    EvalConfig cfg;
    if (j.contains("preset")) {
      cfg = preset_config(j.at("preset").get<std::string>());
    } else {
      cfg.name = j.value("name", std::string{});
      const auto& classes = j.at("classes");
      if (!classes.is_array() || classes.empty()) {
        throw EvalError(ErrorKind::ConfigError, "'classes' must be a non-empty array");
      }
      std::set<std::string> seen;
      for (std::size_t c = 0; c < classes.size(); ++c) {
        const auto& entry = classes[c];
        if (entry.contains("id") && entry.at("id").get<std::size_t>() != c) {
          throw EvalError(ErrorKind::ConfigError, "class ids must be contiguous from 0 in list order");
        }
        auto name = entry.at("name").get<std::string>();
        if (!seen.insert(name).second) throw EvalError(ErrorKind::ConfigError, "duplicate class name '" + name + "'");
        if (!entry.contains("tau") || entry.at("tau").is_null()) {
          throw EvalError(ErrorKind::MissingThreshold, "class '" + name + "' has no tau");
        }
        cfg.thresholds.set(static_cast<ClassId>(c), entry.at("tau").get<double>());
        cfg.classes.names.push_back(std::move(name));
      }
    }
    if (j.contains("name")) cfg.name = j.at("name").get<std::string>();
    if (j.contains("models")) cfg.models = j.at("models").get<std::vector<std::string>>();
    if (j.contains("scope")) cfg.scope = parse_scope(j.at("scope").get<std::string>());
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(ErrorKind::ConfigError, e.what());
  }
}

inline nlohmann::json config_to_json(const EvalConfig& cfg) {
  nlohmann::json j;
  j["name"] = cfg.name;
  j["classes"] = nlohmann::json::array();
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    nlohmann::json entry{{"id", c}, {"name", cfg.classes.names[c]}};
    if (cfg.thresholds.contains(static_cast<ClassId>(c))) entry["tau"] = cfg.thresholds.at(static_cast<ClassId>(c));
    j["classes"].push_back(std::move(entry));
  }
  if (!cfg.models.empty()) j["models"] = cfg.models;
  if (cfg.scope) j["scope"] = std::string(to_string(*cfg.scope));
  return j;
}

inline EvalConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw EvalError(ErrorKind::IoError, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(ErrorKind::ConfigError, path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline void save_config(const EvalConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw EvalError(ErrorKind::IoError, "cannot write " + path.string());
  out << config_to_json(cfg).dump(2) << '\n';
  if (!out) throw EvalError(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace segeval
