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

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace segeval {

/// Boolean point mask selecting the subset over which aggregates are taken.
class EvalScope {
 public:
  EvalScope() = default;

  EvalScope(std::string label, std::vector<bool> mask)
      : label_(std::move(label)),
        mask_(std::move(mask)),
        selected_(static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true))) {}

  static EvalScope full(std::size_t n) { return EvalScope("full", std::vector<bool>(n, true)); }

  const std::string& label() const noexcept { return label_; }
  const std::vector<bool>& mask() const noexcept { return mask_; }
  std::size_t size() const noexcept { return mask_.size(); }
  std::size_t selected_count() const noexcept { return selected_; }
  bool contains(std::size_t i) const { return mask_[i]; }

  double fraction() const noexcept {
    return mask_.empty() ? 0.0 : static_cast<double>(selected_) / static_cast<double>(mask_.size());
  }

 private:
  std::string label_;
  std::vector<bool> mask_;
  std::size_t selected_ = 0;
};

}  // namespace segeval
