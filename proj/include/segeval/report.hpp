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

/// @file report.hpp
/// @brief Machine-readable reports (JSON, CSV) and the console summary.
///
/// Undefined statistics are written as JSON null and as empty CSV cells.
/// JSON numbers keep full double precision; CSV numbers use 6 significant
/// digits. The hard-point mask is stored as [start, length] runs.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "segeval/hard_points.hpp"
#include "segeval/table_io.hpp"

namespace segeval {

using ojson = nlohmann::ordered_json;

inline constexpr const char* kReportFormat = "segeval-report/1";

namespace detail {

inline ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

inline std::optional<double> opt_from(const ojson& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

inline ojson mask_runs(const std::vector<bool>& mask) {
  ojson runs = ojson::array();
  std::size_t i = 0;
  while (i < mask.size()) {
    if (!mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < mask.size() && mask[j]) ++j;
    runs.push_back(ojson::array({i, j - i}));
    i = j;
  }
  return runs;
}

inline std::vector<bool> mask_from_runs(const ojson& runs, std::size_t n) {
  std::vector<bool> mask(n, false);
  for (const auto& run : runs) {
    const std::size_t start = run.at(0).get<std::size_t>();
    const std::size_t len = run.at(1).get<std::size_t>();
    if (start + len > n) throw EvalError(ErrorKind::ParseError, "hard mask run exceeds point count");
    for (std::size_t k = start; k < start + len; ++k) mask[k] = true;
  }
  return mask;
}

}  // namespace detail

inline ojson report_to_json(const MetricsReport& report) {
  const std::size_t nc = report.classes.size();
  ojson j;
  j["format"] = kReportFormat;

  ojson echo;
  echo["name"] = report.config_name;
  echo["classes"] = ojson::array();
  for (std::size_t c = 0; c < nc; ++c) {
    ojson entry{{"id", c}, {"name", report.classes.names[c]}};
    entry["tau"] = report.thresholds.contains(static_cast<ClassId>(c))
                       ? ojson(report.thresholds.at(static_cast<ClassId>(c)))
                       : ojson(nullptr);
    echo["classes"].push_back(entry);
  }
  j["config_echo"] = echo;
  j["models"] = report.models;
  j["point_count"] = report.point_count;
  j["policies"] = {
      {"undefined_values", "null; excluded from class means"},
      {"mean_iou_and_mmde", "mean over defined classes, count reported"},
      {"empty_ground_truth_class", "raw distance infinite, clipped to tau, counted distant"},
      {"distance_reference", "nearest ground-truth point in the full scene"},
      {"tile_merge_tie_break", "lowest class id"},
      {"tile_point_identity", "bitwise equal x, y, z"},
  };

  j["scopes"] = ojson::array();
  for (const ScopeReport& scope : report.scopes) {
    ojson s;
    s["label"] = scope.scope.label();
    s["selected_count"] = scope.scope.selected_count();
    s["fraction"] = scope.scope.fraction();
    if (scope.scope.label() != "full") s["mask_runs"] = detail::mask_runs(scope.scope.mask());
    ojson per_model = ojson::object();
    for (const ModelScopeResult& r : scope.per_model) {
      ojson cls;
      cls["oa"] = detail::opt(r.classification.overall_accuracy);
      ojson iou = ojson::object();
      for (std::size_t c = 0; c < nc; ++c) iou[report.classes.names[c]] = detail::opt(r.classification.iou_per_class[c]);
      cls["iou"] = iou;
      cls["miou"] = detail::opt(r.classification.mean_iou);
      cls["defined_classes"] = r.classification.defined_class_count;
      ojson confusion = ojson::array();
      for (std::size_t g = 0; g < nc; ++g) {
        ojson row = ojson::array();
        for (std::size_t p = 0; p < nc; ++p) row.push_back(r.confusion.at(static_cast<ClassId>(g), static_cast<ClassId>(p)));
        confusion.push_back(row);
      }
      cls["confusion"] = confusion;

      ojson dist;
      dist["mmde"] = detail::opt(r.distance.mmde);
      dist["defined_classes"] = r.distance.mmde_defined_classes;
      ojson per_class = ojson::object();
      for (const ClassDistanceStats& d : r.distance.per_class) {
        per_class[report.classes.names[d.class_id]] = {
            {"mde", detail::opt(d.mde)},
            {"rho", detail::opt(d.rho)},
            {"mu", detail::opt(d.mu)},
            {"predicted_count", d.predicted_count},
            {"error_count", d.error_count},
            {"distant_count", d.distant_count},
            {"near_count", d.near_count},
        };
      }
      dist["per_class"] = per_class;
      per_model[r.model] = {{"classification", cls}, {"distance", dist}};
    }
    s["per_model"] = per_model;
    j["scopes"].push_back(s);
  }
  return j;
}

/// Inverse of report_to_json.
inline MetricsReport report_from_json(const ojson& j) {
  try {
    MetricsReport report;
    const ojson& echo = j.at("config_echo");
    report.config_name = echo.at("name").get<std::string>();
    for (const auto& entry : echo.at("classes")) {
      const auto c = static_cast<ClassId>(report.classes.names.size());
      report.classes.names.push_back(entry.at("name").get<std::string>());
      if (!entry.at("tau").is_null()) report.thresholds.set(c, entry.at("tau").get<double>());
    }
    const std::size_t nc = report.classes.size();
    report.models = j.at("models").get<std::vector<std::string>>();
    report.point_count = j.at("point_count").get<std::size_t>();
    for (const auto& s : j.at("scopes")) {
      const std::string label = s.at("label").get<std::string>();
      std::vector<bool> mask = s.contains("mask_runs") ? detail::mask_from_runs(s.at("mask_runs"), report.point_count)
                                                       : std::vector<bool>(report.point_count, true);
      ScopeReport scope{EvalScope(label, std::move(mask)), {}};
      for (const auto& model : report.models) {
        const ojson& m = s.at("per_model").at(model);
        ModelScopeResult r;
        r.model = model;
        const ojson& cls = m.at("classification");
        r.confusion = ConfusionMatrix(nc);
        const ojson& confusion = cls.at("confusion");
        for (std::size_t g = 0; g < nc; ++g) {
          for (std::size_t p = 0; p < nc; ++p) {
            const auto count = confusion.at(g).at(p).get<std::uint64_t>();
            if (count) r.confusion.add(static_cast<ClassId>(g), static_cast<ClassId>(p), count);
          }
        }
        r.classification.overall_accuracy = detail::opt_from(cls.at("oa"));
        for (std::size_t c = 0; c < nc; ++c) {
          r.classification.iou_per_class.push_back(detail::opt_from(cls.at("iou").at(report.classes.names[c])));
        }
        r.classification.mean_iou = detail::opt_from(cls.at("miou"));
        r.classification.defined_class_count = cls.at("defined_classes").get<std::size_t>();

        const ojson& dist = m.at("distance");
        r.distance.mmde = detail::opt_from(dist.at("mmde"));
        r.distance.mmde_defined_classes = dist.at("defined_classes").get<std::size_t>();
        for (std::size_t c = 0; c < nc; ++c) {
          const ojson& d = dist.at("per_class").at(report.classes.names[c]);
          ClassDistanceStats st;
          st.class_id = static_cast<ClassId>(c);
          st.mde = detail::opt_from(d.at("mde"));
          st.rho = detail::opt_from(d.at("rho"));
          st.mu = detail::opt_from(d.at("mu"));
          st.predicted_count = d.at("predicted_count").get<std::uint64_t>();
          st.error_count = d.at("error_count").get<std::uint64_t>();
          st.distant_count = d.at("distant_count").get<std::uint64_t>();
          st.near_count = d.at("near_count").get<std::uint64_t>();
          r.distance.per_class.push_back(st);
        }
        scope.per_model.push_back(std::move(r));
      }
      report.scopes.push_back(std::move(scope));
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(ErrorKind::ParseError, std::string("report: ") + e.what());
  }
}

namespace detail {

inline std::string csv_number(const std::optional<double>& v) {
  if (!v) return {};
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", *v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace detail

/// One row per (model, scope, class) followed by one summary row per
/// (model, scope).
inline std::string report_to_csv(const MetricsReport& report) {
  std::ostringstream out;
  out << "model,scope,row,class_id,class,selected_count,iou,mde,rho,mu,predicted_count,error_count,"
         "distant_count,near_count,oa,miou,miou_defined_classes,mmde,mmde_defined_classes\n";
  for (const ScopeReport& scope : report.scopes) {
    for (const ModelScopeResult& r : scope.per_model) {
      const std::string prefix = detail::csv_field(r.model) + "," + scope.scope.label() + ",";
      for (const ClassDistanceStats& d : r.distance.per_class) {
        out << prefix << "class," << d.class_id << "," << detail::csv_field(report.classes.names[d.class_id]) << ","
            << scope.scope.selected_count() << "," << detail::csv_number(r.classification.iou_per_class[d.class_id])
            << "," << detail::csv_number(d.mde) << "," << detail::csv_number(d.rho) << ","
            << detail::csv_number(d.mu) << "," << d.predicted_count << "," << d.error_count << ","
            << d.distant_count << "," << d.near_count << ",,,,,\n";
      }
      out << prefix << "summary,,," << scope.scope.selected_count() << ",,,,,,,,,"
          << detail::csv_number(r.classification.overall_accuracy) << ","
          << detail::csv_number(r.classification.mean_iou) << "," << r.classification.defined_class_count << ","
          << detail::csv_number(r.distance.mmde) << "," << r.distance.mmde_defined_classes << "\n";
    }
  }
  return out.str();
}

enum class ReportFormat { Json, Csv };

inline ReportFormat parse_report_format(const std::string& s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw EvalError(ErrorKind::ConfigError, "format must be json or csv (got '" + s + "')");
}

inline void emit_report(const MetricsReport& report, const std::filesystem::path& path, ReportFormat format) {
  const std::string text = format == ReportFormat::Json ? report_to_json(report).dump(2) + "\n" : report_to_csv(report);
  table::write_file(path, text);
}

inline MetricsReport read_json_report(const std::filesystem::path& path) {
  const std::string text = table::read_file(path);
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw EvalError(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

namespace detail {

inline std::string fixed(const std::optional<double>& v, int precision) {
  if (!v) return "-";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(precision) << *v;
  return ss.str();
}

}  // namespace detail

/// Human-readable per-scope tables: one summary block (OA, mIoU, mMDE) and
/// one per-class block (IoU, MDE, rho, mu) per scope.
inline void print_summary(std::ostream& os, const MetricsReport& report, bool color) {
  const std::string bold = color ? "\033[1m" : "";
  const std::string reset = color ? "\033[0m" : "";
  const std::size_t nc = report.classes.size();
  std::size_t name_w = 8;
  for (const auto& m : report.models) name_w = std::max(name_w, m.size() + 2);

  for (const ScopeReport& scope : report.scopes) {
    os << bold << "scope " << scope.scope.label() << ": " << scope.scope.selected_count() << " of "
       << report.point_count << " points (" << detail::fixed(scope.scope.fraction() * 100.0, 2) << "%)" << reset
       << "\n";
    os << "  " << std::left << std::setw(static_cast<int>(name_w)) << "model" << std::right << std::setw(10) << "OA"
       << std::setw(10) << "mIoU" << std::setw(10) << "mMDE" << "\n";
    for (const ModelScopeResult& r : scope.per_model) {
      os << "  " << std::left << std::setw(static_cast<int>(name_w)) << r.model << std::right << std::setw(10)
         << detail::fixed(r.classification.overall_accuracy, 4) << std::setw(10)
         << detail::fixed(r.classification.mean_iou, 4) << std::setw(10) << detail::fixed(r.distance.mmde, 3)
         << "\n";
    }
    std::size_t col_w = 8;
    for (const auto& n : report.classes.names) col_w = std::max(col_w, n.size() + 2);
    os << "  " << std::left << std::setw(static_cast<int>(name_w + 6)) << "per class" << std::right;
    for (const auto& n : report.classes.names) os << std::setw(static_cast<int>(col_w)) << n;
    os << "\n";
    for (const ModelScopeResult& r : scope.per_model) {
      auto row = [&](const char* metric, auto&& value, int precision) {
        os << "  " << std::left << std::setw(static_cast<int>(name_w)) << r.model << std::setw(6) << metric
           << std::right;
        for (std::size_t c = 0; c < nc; ++c) os << std::setw(static_cast<int>(col_w)) << detail::fixed(value(c), precision);
        os << "\n";
      };
      row("IoU", [&](std::size_t c) { return r.classification.iou_per_class[c]; }, 4);
      row("MDE", [&](std::size_t c) { return r.distance.per_class[c].mde; }, 3);
      row("rho", [&](std::size_t c) { return r.distance.per_class[c].rho; }, 3);
      row("mu", [&](std::size_t c) { return r.distance.per_class[c].mu; }, 3);
    }
    os << "\n";
  }
}

}  // namespace segeval
