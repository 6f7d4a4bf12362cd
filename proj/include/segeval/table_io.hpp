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

/// @file table_io.hpp
/// @brief Columnar text tables of points: reader and writer.
///
/// Format: UTF-8 text, first line is a header, fields separated by a comma
/// or a tab (whichever the header uses; tab wins if both appear). Columns:
///
///   x, y, z             coordinates in meters (required)
///   gt                  ground-truth class id (required for evaluation)
///   pred_<model>        predicted class id, one column per model
///   prob_<model>_<id>   optional per-class probability
///   hard                optional 0/1 hard-point flag (written on export)
///
/// Column order is free; unknown columns are ignored. Coordinates are
/// written in shortest round-trip form, so write-then-read is lossless.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "segeval/core.hpp"

namespace segeval {

namespace table {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvalError(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw EvalError(ErrorKind::IoError, "read failed for " + path.string());
  return std::move(ss).str();
}

inline std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline char detect_delimiter(std::string_view header) noexcept {
  return header.find('\t') != std::string_view::npos ? '\t' : ',';
}

inline void split(std::string_view line, char delim, std::vector<std::string_view>& out) {
  out.clear();
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(delim, start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      return;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
}

inline std::string location(const std::string& source, std::size_t line, std::size_t column) {
  return source + ":" + std::to_string(line) + " column " + std::to_string(column + 1);
}

inline double parse_double(std::string_view field, const std::string& where) {
  double v = 0.0;
  if (!field.empty() && field.front() == '+') field.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw EvalError(ErrorKind::ParseError, where + ": not a number '" + std::string(field) + "'");
  }
  return v;
}

inline std::uint32_t parse_label(std::string_view field, const std::string& where) {
  std::uint32_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
    throw EvalError(ErrorKind::ParseError, where + ": not a class id '" + std::string(field) + "'");
  }
  return v;
}

/// Header columns resolved to roles.
struct Layout {
  char delimiter = ',';
  std::size_t column_count = 0;
  std::optional<std::size_t> x, y, z, gt, hard;
  std::vector<std::pair<std::string, std::size_t>> pred;  // model -> column, header order
  std::map<std::string, std::map<ClassId, std::size_t>> prob;  // model -> class -> column
  std::vector<std::string> prob_models;                        // header order
};

inline Layout parse_header(std::string_view header, const std::string& source) {
  Layout layout;
  layout.delimiter = detect_delimiter(header);
  std::vector<std::string_view> names;
  split(header, layout.delimiter, names);
  layout.column_count = names.size();
  std::map<std::string, std::size_t> seen;
  for (std::size_t col = 0; col < names.size(); ++col) {
    const std::string name(names[col]);
    if (!seen.emplace(name, col).second) {
      throw EvalError(ErrorKind::ParseError, location(source, 1, col) + ": duplicate column '" + name + "'");
    }
    if (name == "x") {
      layout.x = col;
    } else if (name == "y") {
      layout.y = col;
    } else if (name == "z") {
      layout.z = col;
    } else if (name == "gt") {
      layout.gt = col;
    } else if (name == "hard") {
      layout.hard = col;
    } else if (name.starts_with("pred_") && name.size() > 5) {
      layout.pred.emplace_back(name.substr(5), col);
    } else if (name.starts_with("prob_")) {
      const std::size_t us = name.rfind('_');
      if (us <= 5 || us + 1 >= name.size()) {
        throw EvalError(ErrorKind::ParseError, location(source, 1, col) + ": malformed column '" + name + "'");
      }
      const std::string model = name.substr(5, us - 5);
      const ClassId c = parse_label(std::string_view(name).substr(us + 1), location(source, 1, col));
      if (!layout.prob.count(model)) layout.prob_models.push_back(model);
      layout.prob[model][c] = col;
    }
  }
  if (!layout.x || !layout.y || !layout.z) {
    throw EvalError(ErrorKind::MissingColumn, source + ": header needs x, y and z columns");
  }
  return layout;
}

/// Calls fn(line_number, fields) for each non-empty data line.
template <typename Fn>
void for_each_row(std::string_view text, const Layout& layout, const std::string& source, Fn&& fn) {
  std::vector<std::string_view> fields;
  std::size_t line_no = 1;
  std::size_t pos = text.find('\n');
  pos = pos == std::string_view::npos ? text.size() : pos + 1;
  while (pos < text.size()) {
    ++line_no;
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    split(line, layout.delimiter, fields);
    if (fields.size() != layout.column_count) {
      throw EvalError(ErrorKind::ParseError, source + ":" + std::to_string(line_no) + ": expected " +
                                                 std::to_string(layout.column_count) + " fields, found " +
                                                 std::to_string(fields.size()));
    }
    fn(line_no, fields);
  }
}

/// Splits off the header line, skipping a UTF-8 byte order mark.
inline std::string_view header_line(std::string_view text, const std::string& source) {
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  const std::size_t nl = text.find('\n');
  const std::string_view header = trim(text.substr(0, nl));
  if (header.empty()) throw EvalError(ErrorKind::ParseError, source + ":1: missing header");
  return header;
}

inline void append_double(std::string& out, double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline void append_uint(std::string& out, std::uint64_t v) {
  char buf[24];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EvalError(ErrorKind::IoError, "cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw EvalError(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace table

/// Result of parsing an evaluation table.
struct ParsedInput {
  EvalContext context;
  std::optional<std::vector<bool>> hard;
};

/// Parses an evaluation table from text. `model_filter`, when non-empty,
/// selects and orders the models to load; otherwise every pred_ column is
/// loaded in header order.
inline ParsedInput parse_cloud_text(std::string_view text, const ClassList& classes,
                                    const ThresholdConfig& thresholds,
                                    const std::vector<std::string>& model_filter = {},
                                    const std::string& source = "<input>") {
  const table::Layout layout = table::parse_header(table::header_line(text, source), source);
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
  if (!layout.gt) throw EvalError(ErrorKind::MissingColumn, source + ": no 'gt' column");

  std::vector<std::pair<std::string, std::size_t>> pred_cols;
  if (model_filter.empty()) {
    pred_cols = layout.pred;
  } else {
    for (const auto& m : model_filter) {
      auto it = std::find_if(layout.pred.begin(), layout.pred.end(), [&](const auto& p) { return p.first == m; });
      if (it == layout.pred.end()) throw EvalError(ErrorKind::MissingColumn, source + ": no column 'pred_" + m + "'");
      pred_cols.push_back(*it);
    }
  }
  if (pred_cols.empty()) throw EvalError(ErrorKind::MissingColumn, source + ": no pred_<model> columns");

  const std::size_t nc = classes.size();
  // Probabilities load only when a model has a column for every class.
  std::vector<std::vector<std::size_t>> prob_cols(pred_cols.size());
  for (std::size_t m = 0; m < pred_cols.size(); ++m) {
    auto it = layout.prob.find(pred_cols[m].first);
    if (it == layout.prob.end()) continue;
    for (ClassId c = 0; c < nc; ++c) {
      auto col = it->second.find(c);
      if (col == it->second.end()) {
        throw EvalError(ErrorKind::MissingColumn, source + ": model '" + pred_cols[m].first +
                                                      "' lacks column prob_" + pred_cols[m].first + "_" +
                                                      std::to_string(c));
      }
      prob_cols[m].push_back(col->second);
    }
    for (const auto& [c, col] : it->second) {
      if (c >= nc) {
        throw EvalError(ErrorKind::UnknownClass, table::location(source, 1, col) + ": probability column for class " +
                                                     std::to_string(c));
      }
    }
  }

  LabeledCloud cloud;
  std::vector<PredictionSet> preds(pred_cols.size());
  for (std::size_t m = 0; m < pred_cols.size(); ++m) {
    preds[m].model_name = pred_cols[m].first;
    if (!prob_cols[m].empty()) preds[m].probabilities.emplace();
  }
  std::optional<std::vector<bool>> hard;
  if (layout.hard) hard.emplace();

  auto label_at = [&](std::string_view field, std::size_t line, std::size_t col) {
    const ClassId c = table::parse_label(field, table::location(source, line, col));
    if (c >= nc) {
      throw EvalError(ErrorKind::UnknownClass, table::location(source, line, col) + ": class " + std::to_string(c) +
                                                   " not declared (" + std::to_string(nc) + " classes)");
    }
    return c;
  };

  table::for_each_row(text, layout, source, [&](std::size_t line, const std::vector<std::string_view>& f) {
    Point3 p{table::parse_double(f[*layout.x], table::location(source, line, *layout.x)),
             table::parse_double(f[*layout.y], table::location(source, line, *layout.y)),
             table::parse_double(f[*layout.z], table::location(source, line, *layout.z))};
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z)) {
      throw EvalError(ErrorKind::NonFiniteCoordinate, source + ":" + std::to_string(line));
    }
    cloud.positions.push_back(p);
    cloud.gt_labels.push_back(label_at(f[*layout.gt], line, *layout.gt));
    for (std::size_t m = 0; m < pred_cols.size(); ++m) {
      preds[m].pred_labels.push_back(label_at(f[pred_cols[m].second], line, pred_cols[m].second));
      for (std::size_t col : prob_cols[m]) {
        preds[m].probabilities->push_back(table::parse_double(f[col], table::location(source, line, col)));
      }
    }
    if (hard) {
      const std::uint32_t h = table::parse_label(f[*layout.hard], table::location(source, line, *layout.hard));
      if (h > 1) throw EvalError(ErrorKind::ParseError, table::location(source, line, *layout.hard) + ": hard must be 0 or 1");
      hard->push_back(h == 1);
    }
  });

  return {validate_inputs(std::move(cloud), std::move(preds), classes, thresholds), std::move(hard)};
}

inline ParsedInput parse_cloud_file(const std::filesystem::path& path, const ClassList& classes,
                                    const ThresholdConfig& thresholds,
                                    const std::vector<std::string>& model_filter = {}) {
  const std::string text = table::read_file(path);
  return parse_cloud_text(text, classes, thresholds, model_filter, path.string());
}

/// Serializes a cloud with its predictions. Probability columns are written
/// for models that carry them; `hard` adds the 0/1 hard-point column.
inline std::string format_cloud(const LabeledCloud& cloud, const std::vector<PredictionSet>& preds,
                                std::size_t n_classes, const std::vector<bool>* hard = nullptr,
                                char delimiter = ',', bool with_gt = true) {
  std::string out;
  out.reserve(cloud.size() * (48 + 4 * preds.size()));
  out += "x";
  out += delimiter;
  out += "y";
  out += delimiter;
  out += "z";
  if (with_gt) {
    out += delimiter;
    out += "gt";
  }
  for (const auto& p : preds) {
    out += delimiter;
    out += "pred_" + p.model_name;
  }
  for (const auto& p : preds) {
    if (!p.probabilities) continue;
    for (std::size_t c = 0; c < n_classes; ++c) {
      out += delimiter;
      out += "prob_" + p.model_name + "_" + std::to_string(c);
    }
  }
  if (hard) {
    out += delimiter;
    out += "hard";
  }
  out += '\n';
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    table::append_double(out, cloud.positions[i].x);
    out += delimiter;
    table::append_double(out, cloud.positions[i].y);
    out += delimiter;
    table::append_double(out, cloud.positions[i].z);
    if (with_gt) {
      out += delimiter;
      table::append_uint(out, cloud.gt_labels[i]);
    }
    for (const auto& p : preds) {
      out += delimiter;
      table::append_uint(out, p.pred_labels[i]);
    }
    for (const auto& p : preds) {
      if (!p.probabilities) continue;
      for (std::size_t c = 0; c < n_classes; ++c) {
        out += delimiter;
        table::append_double(out, (*p.probabilities)[i * n_classes + c]);
      }
    }
    if (hard) {
      out += delimiter;
      out += (*hard)[i] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

inline void write_cloud_file(const std::filesystem::path& path, const LabeledCloud& cloud,
                             const std::vector<PredictionSet>& preds, std::size_t n_classes,
                             const std::vector<bool>* hard = nullptr, char delimiter = ',') {
  table::write_file(path, format_cloud(cloud, preds, n_classes, hard, delimiter));
}

}  // namespace segeval
