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

/// @file class_metrics.hpp
/// @brief Confusion matrix, overall accuracy, per-class IoU and mIoU over a
///        scope. Ratios with a zero denominator are reported as Undefined
///        (std::nullopt) and excluded from means.

#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "segeval/core.hpp"
#include "segeval/numeric.hpp"
#include "segeval/scope.hpp"

namespace segeval {

/// Rows are ground truth, columns are predictions.
class ConfusionMatrix {
 public:
  ConfusionMatrix() = default;
  explicit ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {}

  std::size_t class_count() const noexcept { return n_; }
  std::uint64_t scope_size() const noexcept { return total_; }

  std::uint64_t at(ClassId gt, ClassId pred) const { return counts_.at(gt * n_ + pred); }

  void add(ClassId gt, ClassId pred, std::uint64_t count = 1) {
    counts_.at(gt * n_ + pred) += count;
    total_ += count;
  }

  /// Cell-wise sum; exact and order-independent.
  ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
    if (other.n_ != n_) throw EvalError(ErrorKind::LengthMismatch, "confusion matrix class count");
    for (std::size_t k = 0; k < counts_.size(); ++k) counts_[k] += other.counts_[k];
    total_ += other.total_;
    return *this;
  }

  std::uint64_t trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t c = 0; c < n_; ++c) t += counts_[c * n_ + c];
    return t;
  }

  std::uint64_t true_positives(ClassId c) const { return at(c, c); }

  std::uint64_t false_positives(ClassId c) const {
    std::uint64_t s = 0;
    for (std::size_t g = 0; g < n_; ++g) s += counts_[g * n_ + c];
    return s - at(c, c);
  }

  std::uint64_t false_negatives(ClassId c) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < n_; ++p) s += counts_[c * n_ + p];
    return s - at(c, c);
  }

  const std::vector<std::uint64_t>& cells() const noexcept { return counts_; }

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline ConfusionMatrix confusion_matrix(const std::vector<ClassId>& gt, const std::vector<ClassId>& pred,
                                        const EvalScope& scope, std::size_t n_classes, unsigned threads = 1) {
  if (gt.size() != pred.size() || scope.size() != gt.size()) {
    throw EvalError(ErrorKind::LengthMismatch, "confusion matrix inputs are not aligned");
  }
  std::vector<ConfusionMatrix> partial;
  std::mutex partial_mutex;
  parallel_for(gt.size(), threads, [&](std::size_t begin, std::size_t end) {
    ConfusionMatrix local(n_classes);
    for (std::size_t i = begin; i < end; ++i) {
      if (scope.contains(i)) local.add(gt[i], pred[i]);
    }
    std::lock_guard lock(partial_mutex);
    partial.push_back(std::move(local));
  });
  ConfusionMatrix cm(n_classes);
  for (const auto& p : partial) cm += p;
  return cm;
}

inline std::optional<double> overall_accuracy(const ConfusionMatrix& cm) {
  if (cm.scope_size() == 0) return std::nullopt;
  return static_cast<double>(cm.trace()) / static_cast<double>(cm.scope_size());
}

inline std::vector<std::optional<double>> iou_per_class(const ConfusionMatrix& cm) {
  std::vector<std::optional<double>> out(cm.class_count());
  for (ClassId c = 0; c < cm.class_count(); ++c) {
    const std::uint64_t tp = cm.true_positives(c);
    const std::uint64_t denom = tp + cm.false_positives(c) + cm.false_negatives(c);
    if (denom != 0) out[c] = static_cast<double>(tp) / static_cast<double>(denom);
  }
  return out;
}

struct MeanIoU {
  std::optional<double> value;
  std::size_t defined_class_count = 0;
};

/// Mean over the Defined entries only.
inline MeanIoU mean_iou(const std::vector<std::optional<double>>& ious) {
  CompensatedSum sum;
  std::size_t defined = 0;
  for (const auto& v : ious) {
    if (v) {
      sum.add(*v);
      ++defined;
    }
  }
  if (defined == 0) return {};
  return {sum.value() / static_cast<double>(defined), defined};
}

struct ClassificationStats {
  std::optional<double> overall_accuracy;
  std::vector<std::optional<double>> iou_per_class;
  std::optional<double> mean_iou;
  std::size_t defined_class_count = 0;
};

inline ClassificationStats classification_stats(const ConfusionMatrix& cm) {
  ClassificationStats s;
  s.overall_accuracy = overall_accuracy(cm);
  s.iou_per_class = iou_per_class(cm);
  const MeanIoU m = mean_iou(s.iou_per_class);
  s.mean_iou = m.value;
  s.defined_class_count = m.defined_class_count;
  return s;
}

}  // namespace segeval
