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

/// @file core.hpp
/// @brief Shared data model: labeled clouds, prediction sets, class
///        thresholds, validation and class partitions.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace segeval {

using ClassId = std::uint32_t;

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// Squared Euclidean distance. Every distance in the library goes through
/// this single expression so indexed and linear-scan results agree bitwise.
inline double squared_distance(const Point3& a, const Point3& b) noexcept {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  const double dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

enum class ErrorKind {
  LengthMismatch,
  UnknownClass,
  MissingThreshold,
  NonFiniteCoordinate,
  InvalidProbabilities,
  EmptyCloud,
  NoModels,
  ParseError,
  MissingColumn,
  MissingProbabilities,
  InvalidDistribution,
  ConfigError,
  SpecError,
  IoError,
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::UnknownClass: return "UnknownClass";
    case ErrorKind::MissingThreshold: return "MissingThreshold";
    case ErrorKind::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorKind::InvalidProbabilities: return "InvalidProbabilities";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::NoModels: return "NoModels";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MissingProbabilities: return "MissingProbabilities";
    case ErrorKind::InvalidDistribution: return "InvalidDistribution";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::SpecError: return "SpecError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class EvalError : public std::runtime_error {
 public:
  EvalError(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// The scene X: positions in meters with ground-truth labels, in file order.
struct LabeledCloud {
  std::vector<Point3> positions;
  std::vector<ClassId> gt_labels;

  std::size_t size() const noexcept { return positions.size(); }
};

/// Predictions of one model, aligned to a LabeledCloud. Probabilities, when
/// present, are stored row-major as size() x n_classes.
struct PredictionSet {
  std::string model_name;
  std::vector<ClassId> pred_labels;
  std::optional<std::vector<double>> probabilities;

  std::size_t size() const noexcept { return pred_labels.size(); }
};

/// Class -> clipping threshold tau_c in meters.
class ThresholdConfig {
 public:
  ThresholdConfig() = default;
  explicit ThresholdConfig(std::map<ClassId, double> tau) {
    for (const auto& [c, t] : tau) set(c, t);
  }

  void set(ClassId c, double tau) {
    if (!std::isfinite(tau) || tau <= 0.0) {
      throw EvalError(ErrorKind::ConfigError,
                      "threshold for class " + std::to_string(c) + " must be finite and > 0");
    }
    tau_[c] = tau;
  }

  bool contains(ClassId c) const noexcept { return tau_.count(c) != 0; }

  double at(ClassId c) const {
    auto it = tau_.find(c);
    if (it == tau_.end()) {
      throw EvalError(ErrorKind::MissingThreshold, "no threshold for class " + std::to_string(c));
    }
    return it->second;
  }

  const std::map<ClassId, double>& entries() const noexcept { return tau_; }

 private:
  std::map<ClassId, double> tau_;
};

/// Ordered class names; ids are the positions 0..n-1.
struct ClassList {
  std::vector<std::string> names;

  std::size_t size() const noexcept { return names.size(); }
  bool contains(ClassId c) const noexcept { return c < names.size(); }
};

/// One mapping of a ClassPartition: per class, ascending point indices.
using ClassIndexLists = std::vector<std::vector<std::size_t>>;

/// X_{y=c} for the ground truth and X_{yhat=c} for each model.
struct ClassPartition {
  ClassIndexLists by_gt;
  std::vector<ClassIndexLists> by_pred;
};

/// Groups point indices by label. Lists come out sorted ascending since the
/// scan runs in index order; absent classes map to empty lists.
inline ClassIndexLists partition_by_class(const std::vector<ClassId>& labels, std::size_t n_classes) {
  ClassIndexLists out(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= n_classes) {
      throw EvalError(ErrorKind::UnknownClass,
                      "label " + std::to_string(labels[i]) + " at point " + std::to_string(i));
    }
    out[labels[i]].push_back(i);
  }
  return out;
}

/// A validated, immutable evaluation input.
struct EvalContext {
  LabeledCloud cloud;
  std::vector<PredictionSet> predictions;
  ClassList classes;
  ThresholdConfig thresholds;

  std::size_t point_count() const noexcept { return cloud.size(); }
  std::size_t class_count() const noexcept { return classes.size(); }

  ClassPartition partition() const {
    ClassPartition p;
    p.by_gt = partition_by_class(cloud.gt_labels, class_count());
    for (const auto& pred : predictions) p.by_pred.push_back(partition_by_class(pred.pred_labels, class_count()));
    return p;
  }
};

namespace detail {

inline void check_labels(const std::vector<ClassId>& labels, std::size_t n_classes,
                         const ThresholdConfig& thresholds, std::string_view what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const ClassId c = labels[i];
    if (c >= n_classes) {
      throw EvalError(ErrorKind::UnknownClass, std::string(what) + " label " + std::to_string(c) +
                                                   " at point " + std::to_string(i) + " (" +
                                                   std::to_string(n_classes) + " classes declared)");
    }
    if (!thresholds.contains(c)) {
      throw EvalError(ErrorKind::MissingThreshold, "class " + std::to_string(c) + " used by " +
                                                       std::string(what) + " has no threshold");
    }
  }
}

}  // namespace detail

/// Checks every invariant of the input types and returns the evaluation
/// context. Throws EvalError naming the first violation found.
inline EvalContext validate_inputs(LabeledCloud cloud, std::vector<PredictionSet> preds, ClassList classes,
                                   ThresholdConfig thresholds) {
  const std::size_t n = cloud.size();
  if (n == 0) throw EvalError(ErrorKind::EmptyCloud, "cloud has no points");
  if (cloud.gt_labels.size() != n) {
    throw EvalError(ErrorKind::LengthMismatch, "cloud has " + std::to_string(n) + " positions but " +
                                                   std::to_string(cloud.gt_labels.size()) + " labels");
  }
  if (classes.size() == 0) throw EvalError(ErrorKind::ConfigError, "no classes declared");
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = cloud.positions[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw EvalError(ErrorKind::NonFiniteCoordinate, "point " + std::to_string(i));
    }
  }
  detail::check_labels(cloud.gt_labels, classes.size(), thresholds, "ground-truth");

  const std::size_t nc = classes.size();
  for (const auto& pred : preds) {
    if (pred.size() != n) {
      throw EvalError(ErrorKind::LengthMismatch, "model '" + pred.model_name + "' has " +
                                                     std::to_string(pred.size()) + " labels, cloud has " +
                                                     std::to_string(n));
    }
    detail::check_labels(pred.pred_labels, nc, thresholds, "model '" + pred.model_name + "'");
    if (pred.probabilities) {
      const auto& probs = *pred.probabilities;
      if (probs.size() != n * nc) {
        throw EvalError(ErrorKind::LengthMismatch, "model '" + pred.model_name + "' probability matrix size");
      }
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < nc; ++c) {
          const double v = probs[i * nc + c];
          if (!std::isfinite(v) || v < 0.0) {
            throw EvalError(ErrorKind::InvalidProbabilities,
                            "model '" + pred.model_name + "' point " + std::to_string(i));
          }
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-6) {
          throw EvalError(ErrorKind::InvalidProbabilities, "model '" + pred.model_name + "' point " +
                                                               std::to_string(i) + " row sums to " +
                                                               std::to_string(sum));
        }
      }
    }
  }
  for (std::size_t a = 0; a < preds.size(); ++a) {
    for (std::size_t b = a + 1; b < preds.size(); ++b) {
      if (preds[a].model_name == preds[b].model_name) {
        throw EvalError(ErrorKind::ConfigError, "duplicate model name '" + preds[a].model_name + "'");
      }
    }
  }
  return EvalContext{std::move(cloud), std::move(preds), std::move(classes), std::move(thresholds)};
}

}  // namespace segeval
