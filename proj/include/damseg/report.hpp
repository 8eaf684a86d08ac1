#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "damseg/genbridge.hpp"
#include "damseg/labels.hpp"
#include "damseg/metrics.hpp"

namespace damseg {

// Overlay palette: ground-truth only (miss) green, prediction only (false
// alarm) red, both (hit) yellow. The photo is dimmed to 60% and tinted
// pixels are a 50/50 blend of the dimmed photo and the tint.
inline constexpr Rgb kMissTint{0, 255, 0};
inline constexpr Rgb kFalseAlarmTint{255, 0, 0};
inline constexpr Rgb kHitTint{255, 255, 0};
inline constexpr double kOverlayDim = 0.6;
inline constexpr double kOverlayAlpha = 0.5;

// Display colours for tri-labels (stored files keep raw indices).
inline constexpr Rgb kLabelBackgroundColor{0, 0, 0};
inline constexpr Rgb kLabelEdgeColor{255, 255, 255};
inline constexpr Rgb kLabelRoiColor{255, 0, 0};

inline std::uint8_t overlay_channel(std::uint8_t photo, std::optional<std::uint8_t> tint) {
  const double dimmed = std::round(kOverlayDim * photo);
  if (!tint) return static_cast<std::uint8_t>(dimmed);
  return static_cast<std::uint8_t>(
      std::lround((1.0 - kOverlayAlpha) * dimmed + kOverlayAlpha * *tint));
}

inline Raster render_overlay(const Raster& photo, const RoiMask& gt, const RoiMask& pred) {
  if (!gt.same_shape(photo) || !pred.same_shape(photo)) {
    throw DimensionError("overlay inputs differ in size: photo " +
                         shape_string(photo.width(), photo.height()) + ", gt " +
                         shape_string(gt.width(), gt.height()) + ", pred " +
                         shape_string(pred.width(), pred.height()));
  }
  const Raster rgb = to_rgb(photo);
  Raster out(rgb.width(), rgb.height(), 3);
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const bool g = gt.at(x, y);
      const bool p = pred.at(x, y);
      const Rgb* tint = g && p ? &kHitTint : g ? &kMissTint : p ? &kFalseAlarmTint : nullptr;
      for (int c = 0; c < 3; ++c) {
        out.at(x, y, c) = overlay_channel(
            rgb.at(x, y, c), tint ? std::optional<std::uint8_t>((*tint)[c]) : std::nullopt);
      }
    }
  }
  return out;
}

inline Raster render_label(const TriLabel& label) {
  Raster out(label.width(), label.height(), 3);
  for (int y = 0; y < label.height(); ++y) {
    for (int x = 0; x < label.width(); ++x) {
      const Rgb& c = label.at(x, y) == LabelClass::roi    ? kLabelRoiColor
                     : label.at(x, y) == LabelClass::edge ? kLabelEdgeColor
                                                          : kLabelBackgroundColor;
      for (int k = 0; k < 3; ++k) out.at(x, y, k) = c[k];
    }
  }
  return out;
}

struct RunEntry {
  std::string label;
  MetricsReport report;
  std::optional<double> wall_clock_minutes;
};

struct RunComparison {
  std::vector<RunEntry> runs;
};

enum class TableFormat { text, csv, json };

inline TableFormat parse_table_format(std::string_view s) {
  if (s == "text") return TableFormat::text;
  if (s == "csv") return TableFormat::csv;
  if (s == "json") return TableFormat::json;
  throw ParameterError("unknown table format '" + std::string(s) + "' (expected text|csv|json)");
}

namespace detail {

// ROI first, then the remaining classes in report order.
inline std::vector<std::size_t> display_class_order(const std::vector<std::string>& classes) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] == "roi") order.push_back(i);
  for (std::size_t i = 0; i < classes.size(); ++i)
    if (classes[i] != "roi") order.push_back(i);
  return order;
}

struct TableLayout {
  std::vector<std::string> header;
  std::vector<std::string> keys;  // json keys, parallel to metric columns
  std::vector<std::vector<std::optional<double>>> rows;  // one per run (+ delta)
  std::vector<std::string> labels;
  bool has_time = false;
  bool has_delta = false;
};

inline std::optional<double> metric_of(const ClassMetrics& m, int which) {
  switch (which) {
    case 0: return m.iou;
    case 1: return m.precision;
    case 2: return m.recall;
    default: return m.bf;
  }
}

inline TableLayout layout_comparison(const RunComparison& cmp) {
  if (cmp.runs.empty()) throw ParameterError("comparison needs at least one run");
  const auto& first = cmp.runs.front().report;
  for (const auto& run : cmp.runs) {
    if (run.report.classes != first.classes) {
      throw ParameterError("run '" + run.label + "' has a different class set");
    }
    if (run.report.mode != first.mode) {
      throw ParameterError("run '" + run.label + "' uses a different aggregation mode");
    }
  }
  TableLayout t;
  t.has_time = std::any_of(cmp.runs.begin(), cmp.runs.end(),
                           [](const RunEntry& r) { return r.wall_clock_minutes.has_value(); });
  t.header.push_back("run");
  if (t.has_time) {
    t.header.push_back("minutes");
    t.keys.push_back("minutes");
  }
  t.header.push_back("mean_iou");
  t.keys.push_back("mean_iou");
  const auto order = display_class_order(first.classes);
  static constexpr const char* kMetricNames[] = {"iou", "precision", "recall", "bf"};
  for (int metric = 0; metric < 4; ++metric) {
    for (std::size_t c : order) {
      t.header.push_back(first.classes[c] + "_" + kMetricNames[metric]);
      t.keys.push_back(first.classes[c] + "_" + kMetricNames[metric]);
    }
  }
  for (const auto& run : cmp.runs) {
    std::vector<std::optional<double>> row;
    if (t.has_time) row.push_back(run.wall_clock_minutes);
    row.push_back(run.report.mean_iou);
    for (int metric = 0; metric < 4; ++metric)
      for (std::size_t c : order) row.push_back(metric_of(run.report.per_class.at(c), metric));
    t.rows.push_back(std::move(row));
    t.labels.push_back(run.label);
  }
  if (cmp.runs.size() == 2) {
    std::vector<std::optional<double>> delta;
    for (std::size_t i = 0; i < t.rows[0].size(); ++i) {
      const auto& a = t.rows[0][i];
      const auto& b = t.rows[1][i];
      delta.push_back(a && b ? std::optional<double>(*b - *a) : std::nullopt);
    }
    t.rows.push_back(std::move(delta));
    t.labels.push_back("delta");
    t.has_delta = true;
  }
  return t;
}

inline double round4(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;  // no "-0.0000"
}

inline std::string format_cell(const std::optional<double>& v, bool signed_value,
                               std::string_view undefined) {
  if (!v) return std::string(undefined);
  return signed_value ? fmt::format("{:+.4f}", round4(*v)) : fmt::format("{:.4f}", round4(*v));
}

}  // namespace detail

// One row per run, then a signed `delta` row (second minus first) when
// exactly two runs are compared. Values carry 4 decimals; undefined metrics
// print as "n/a" (text), an empty field (csv) or null (json).
inline std::string render_comparison(const RunComparison& cmp, TableFormat format) {
  const auto t = detail::layout_comparison(cmp);
  const std::size_t delta_row = t.has_delta ? t.rows.size() - 1 : t.rows.size();

  if (format == TableFormat::json) {
    nlohmann::json runs = nlohmann::json::array();
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      nlohmann::json row = {{"run", t.labels[r]}};
      for (std::size_t i = 0; i < t.keys.size(); ++i) {
        row[t.keys[i]] = t.rows[r][i] ? nlohmann::json(detail::round4(*t.rows[r][i]))
                                      : nlohmann::json(nullptr);
      }
      if (r == delta_row) continue;
      runs.push_back(row);
    }
    nlohmann::json out = {{"mode", std::string(to_string(cmp.runs.front().report.mode))},
                          {"runs", runs}};
    if (t.has_delta) {
      nlohmann::json delta = nlohmann::json::object();
      for (std::size_t i = 0; i < t.keys.size(); ++i) {
        delta[t.keys[i]] = t.rows[delta_row][i]
                               ? nlohmann::json(detail::round4(*t.rows[delta_row][i]))
                               : nlohmann::json(nullptr);
      }
      out["delta"] = delta;
    }
    return out.dump(2) + "\n";
  }

  std::vector<std::vector<std::string>> cells;
  cells.push_back(t.header);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<std::string> line{t.labels[r]};
    for (const auto& v : t.rows[r])
      line.push_back(detail::format_cell(v, r == delta_row,
                                         format == TableFormat::csv ? "" : "n/a"));
    cells.push_back(std::move(line));
  }

  std::string out;
  if (format == TableFormat::csv) {
    for (const auto& line : cells) {
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (i) out += ',';
        const bool quote = line[i].find_first_of(",\"\n") != std::string::npos;
        if (quote) {
          out += '"';
          for (char ch : line[i]) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
          out += '"';
        } else {
          out += line[i];
        }
      }
      out += '\n';
    }
    return out;
  }

  std::vector<std::size_t> widths(t.header.size(), 0);
  for (const auto& line : cells)
    for (std::size_t i = 0; i < line.size(); ++i) widths[i] = std::max(widths[i], line[i].size());
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string row;
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) row += "  ";
      row += i == 0 ? fmt::format("{:<{}}", cells[r][i], widths[i])
                    : fmt::format("{:>{}}", cells[r][i], widths[i]);
    }
    while (!row.empty() && row.back() == ' ') row.pop_back();
    out += row + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out += std::string(total + 2 * (widths.size() - 1), '-') + '\n';
    }
  }
  return out;
}

}  // namespace damseg
