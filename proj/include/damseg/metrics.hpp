#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "damseg/mask.hpp"

namespace damseg {

// Segmentation classes of an ROI mask. The index equals the mask bit.
enum class SegClass : int { background = 0, roi = 1 };

inline const std::vector<std::string>& binary_class_names() {
  static const std::vector<std::string> names{"background", "roi"};
  return names;
}

// counts[truth][predicted]
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::vector<std::string> classes = binary_class_names())
      : classes_(std::move(classes)), counts_(classes_.size() * classes_.size(), 0) {}

  std::size_t num_classes() const { return classes_.size(); }
  const std::vector<std::string>& classes() const { return classes_; }

  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * classes_.size() + predicted];
  }
  void add(std::size_t truth, std::size_t predicted, std::uint64_t n = 1) {
    counts_[truth * classes_.size() + predicted] += n;
  }

  std::uint64_t total() const {
    std::uint64_t t = 0;
    for (auto c : counts_) t += c;
    return t;
  }

  std::uint64_t true_positive(std::size_t c) const { return at(c, c); }
  std::uint64_t false_positive(std::size_t c) const {
    std::uint64_t s = 0;
    for (std::size_t t = 0; t < num_classes(); ++t)
      if (t != c) s += at(t, c);
    return s;
  }
  std::uint64_t false_negative(std::size_t c) const {
    std::uint64_t s = 0;
    for (std::size_t p = 0; p < num_classes(); ++p)
      if (p != c) s += at(c, p);
    return s;
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) throw ParameterError("confusion matrices have different classes");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    return *this;
  }
  friend ConfusionMatrix operator+(ConfusionMatrix a, const ConfusionMatrix& b) { return a += b; }

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::uint64_t> counts_;
};

inline ConfusionMatrix confusion(const RoiMask& gt, const RoiMask& pred) {
  if (!gt.same_shape(pred)) {
    throw DimensionError("ground truth is " + shape_string(gt.width(), gt.height()) +
                         " but prediction is " + shape_string(pred.width(), pred.height()));
  }
  std::uint64_t cells[2][2] = {};
  for (std::size_t i = 0; i < gt.size(); ++i) ++cells[gt.test(i)][pred.test(i)];
  ConfusionMatrix cm;
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t p = 0; p < 2; ++p) cm.add(t, p, cells[t][p]);
  return cm;
}

inline std::optional<double> safe_ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Mean over the defined entries; undefined when none are.
inline std::optional<double> mean_of_defined(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

struct IouResult {
  std::vector<std::optional<double>> per_class;
  std::optional<double> mean;
};

inline IouResult iou(const ConfusionMatrix& cm) {
  IouResult r;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    const auto tp = cm.true_positive(c);
    r.per_class.push_back(safe_ratio(tp, tp + cm.false_positive(c) + cm.false_negative(c)));
  }
  r.mean = mean_of_defined(r.per_class);
  return r;
}

struct PrecisionRecall {
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> recall;
};

inline PrecisionRecall precision_recall(const ConfusionMatrix& cm) {
  PrecisionRecall r;
  for (std::size_t c = 0; c < cm.num_classes(); ++c) {
    const auto tp = cm.true_positive(c);
    r.precision.push_back(safe_ratio(tp, tp + cm.false_positive(c)));
    r.recall.push_back(safe_ratio(tp, tp + cm.false_negative(c)));
  }
  return r;
}

// round(0.75% of the image diagonal), at least one pixel.
inline int default_bf_tolerance(int width, int height) {
  const double diag = std::sqrt(static_cast<double>(width) * width +
                                static_cast<double>(height) * height);
  return std::max(1, static_cast<int>(std::lround(0.0075 * diag)));
}

// Pixels of class `cls` with at least one in-image 4-neighbour of the other
// class. The image border itself is not a boundary.
inline std::vector<std::uint8_t> class_boundary(const RoiMask& mask, bool cls) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<std::uint8_t> out(mask.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(x, y) != cls) continue;
      const bool differs = (x > 0 && mask.at(x - 1, y) != cls) ||
                           (x + 1 < w && mask.at(x + 1, y) != cls) ||
                           (y > 0 && mask.at(x, y - 1) != cls) ||
                           (y + 1 < h && mask.at(x, y + 1) != cls);
      if (differs) out[static_cast<std::size_t>(y) * w + x] = 1;
    }
  }
  return out;
}

struct BoundaryScore {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> f1;
};

namespace detail {

// Number of `from` boundary pixels with a `to` boundary pixel within
// Euclidean distance `tol`.
inline std::size_t matched_boundary(const std::vector<std::uint8_t>& from,
                                    const std::vector<std::uint8_t>& to, int w, int h, int tol) {
  std::size_t matched = 0;
  const long tol2 = static_cast<long>(tol) * tol;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!from[static_cast<std::size_t>(y) * w + x]) continue;
      bool hit = false;
      for (int dy = -tol; dy <= tol && !hit; ++dy) {
        const int ny = y + dy;
        if (ny < 0 || ny >= h) continue;
        for (int dx = -tol; dx <= tol; ++dx) {
          const int nx = x + dx;
          if (nx < 0 || nx >= w || static_cast<long>(dx) * dx + static_cast<long>(dy) * dy > tol2)
            continue;
          if (to[static_cast<std::size_t>(ny) * w + nx]) {
            hit = true;
            break;
          }
        }
      }
      if (hit) ++matched;
    }
  }
  return matched;
}

}  // namespace detail

// Boundary F1 per class (index = SegClass). Undefined when the class is in
// neither mask; 0 when it is in exactly one; 1 when both masks are entirely
// that class (no contour on either side).
inline std::vector<BoundaryScore> bf_score(const RoiMask& gt, const RoiMask& pred,
                                           std::optional<int> tolerance = std::nullopt) {
  if (!gt.same_shape(pred)) {
    throw DimensionError("ground truth is " + shape_string(gt.width(), gt.height()) +
                         " but prediction is " + shape_string(pred.width(), pred.height()));
  }
  const int tol = tolerance.value_or(default_bf_tolerance(gt.width(), gt.height()));
  if (tol < 0) throw ParameterError("BF tolerance must be >= 0");
  const std::size_t gt_roi = gt.count();
  const std::size_t pred_roi = pred.count();
  std::vector<BoundaryScore> scores;
  for (bool cls : {false, true}) {
    const std::size_t gt_n = cls ? gt_roi : gt.size() - gt_roi;
    const std::size_t pred_n = cls ? pred_roi : pred.size() - pred_roi;
    BoundaryScore s;
    if (gt_n == 0 && pred_n == 0) {
      scores.push_back(s);
      continue;
    }
    if (gt_n == 0 || pred_n == 0) {
      s.precision = 0.0;
      s.recall = 0.0;
      s.f1 = 0.0;
      scores.push_back(s);
      continue;
    }
    const auto gb = class_boundary(gt, cls);
    const auto pb = class_boundary(pred, cls);
    std::size_t gb_n = 0;
    std::size_t pb_n = 0;
    for (auto v : gb) gb_n += v;
    for (auto v : pb) pb_n += v;
    if (gb_n == 0 && pb_n == 0) {
      s.precision = 1.0;
      s.recall = 1.0;
      s.f1 = 1.0;
      scores.push_back(s);
      continue;
    }
    const double p =
        pb_n == 0 ? 0.0
                  : static_cast<double>(detail::matched_boundary(pb, gb, gt.width(), gt.height(), tol)) /
                        static_cast<double>(pb_n);
    const double r =
        gb_n == 0 ? 0.0
                  : static_cast<double>(detail::matched_boundary(gb, pb, gt.width(), gt.height(), tol)) /
                        static_cast<double>(gb_n);
    s.precision = p;
    s.recall = r;
    s.f1 = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    scores.push_back(s);
  }
  return scores;
}

enum class AggregationMode { global, per_image_mean };

inline std::string_view to_string(AggregationMode m) {
  return m == AggregationMode::global ? "global" : "per-image-mean";
}

inline AggregationMode parse_aggregation_mode(std::string_view s) {
  if (s == "global") return AggregationMode::global;
  if (s == "per-image-mean" || s == "per_image_mean") return AggregationMode::per_image_mean;
  throw ParameterError("unknown aggregation mode '" + std::string(s) +
                       "' (expected global|per-image-mean)");
}

struct ClassMetrics {
  std::optional<double> iou;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> bf;

  bool operator==(const ClassMetrics&) const = default;
};

struct MetricsReport {
  std::vector<std::string> classes = binary_class_names();
  std::vector<ClassMetrics> per_class;
  std::optional<double> mean_iou;
  std::size_t image_count = 0;
  AggregationMode mode = AggregationMode::per_image_mean;
  // Unset means the per-image default (0.75% of the diagonal).
  std::optional<int> bf_tolerance;

  const ClassMetrics& of(SegClass c) const { return per_class.at(static_cast<std::size_t>(c)); }

  bool operator==(const MetricsReport&) const = default;
};

struct MaskPair {
  RoiMask gt;
  RoiMask pred;
};

inline MetricsReport evaluate_run(std::span<const MaskPair> pairs, AggregationMode mode,
                                  std::optional<int> bf_tolerance = std::nullopt) {
  if (pairs.empty()) throw ParameterError("evaluate_run needs at least one (gt, pred) pair");
  MetricsReport report;
  report.mode = mode;
  report.image_count = pairs.size();
  report.bf_tolerance = bf_tolerance;
  const std::size_t n_classes = report.classes.size();
  report.per_class.resize(n_classes);

  std::vector<std::vector<std::optional<double>>> bf(n_classes);
  std::vector<std::vector<std::optional<double>>> ious(n_classes), precs(n_classes),
      recs(n_classes);
  ConfusionMatrix total;
  for (const auto& pair : pairs) {
    const ConfusionMatrix cm = confusion(pair.gt, pair.pred);
    total += cm;
    const auto scores = bf_score(pair.gt, pair.pred, bf_tolerance);
    for (std::size_t c = 0; c < n_classes; ++c) bf[c].push_back(scores[c].f1);
    if (mode == AggregationMode::per_image_mean) {
      const auto i = iou(cm);
      const auto pr = precision_recall(cm);
      for (std::size_t c = 0; c < n_classes; ++c) {
        ious[c].push_back(i.per_class[c]);
        precs[c].push_back(pr.precision[c]);
        recs[c].push_back(pr.recall[c]);
      }
    }
  }

  if (mode == AggregationMode::global) {
    const auto i = iou(total);
    const auto pr = precision_recall(total);
    for (std::size_t c = 0; c < n_classes; ++c) {
      report.per_class[c].iou = i.per_class[c];
      report.per_class[c].precision = pr.precision[c];
      report.per_class[c].recall = pr.recall[c];
    }
  } else {
    for (std::size_t c = 0; c < n_classes; ++c) {
      report.per_class[c].iou = mean_of_defined(ious[c]);
      report.per_class[c].precision = mean_of_defined(precs[c]);
      report.per_class[c].recall = mean_of_defined(recs[c]);
    }
  }
  for (std::size_t c = 0; c < n_classes; ++c) report.per_class[c].bf = mean_of_defined(bf[c]);

  std::vector<std::optional<double>> class_ious;
  for (const auto& m : report.per_class) class_ious.push_back(m.iou);
  report.mean_iou = mean_of_defined(class_ious);
  return report;
}

// JSON form: undefined metrics are null.
inline nlohmann::json to_json(const MetricsReport& r) {
  auto opt = [](const std::optional<double>& v) -> nlohmann::json {
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
  };
  nlohmann::json classes = nlohmann::json::object();
  for (std::size_t c = 0; c < r.classes.size(); ++c) {
    const auto& m = r.per_class[c];
    classes[r.classes[c]] = {{"iou", opt(m.iou)},
                             {"precision", opt(m.precision)},
                             {"recall", opt(m.recall)},
                             {"bf", opt(m.bf)}};
  }
  return {{"class_order", r.classes},
          {"classes", classes},
          {"mean_iou", opt(r.mean_iou)},
          {"image_count", r.image_count},
          {"mode", std::string(to_string(r.mode))},
          {"bf_tolerance", r.bf_tolerance ? nlohmann::json(*r.bf_tolerance)
                                          : nlohmann::json("auto")}};
}

inline MetricsReport metrics_report_from_json(const nlohmann::json& j) {
  try {
    auto opt = [](const nlohmann::json& v) -> std::optional<double> {
      if (v.is_null()) return std::nullopt;
      return v.get<double>();
    };
    MetricsReport r;
    r.classes = j.at("class_order").get<std::vector<std::string>>();
    for (const auto& name : r.classes) {
      const auto& m = j.at("classes").at(name);
      r.per_class.push_back(
          {opt(m.at("iou")), opt(m.at("precision")), opt(m.at("recall")), opt(m.at("bf"))});
    }
    r.mean_iou = opt(j.at("mean_iou"));
    r.image_count = j.at("image_count").get<std::size_t>();
    r.mode = parse_aggregation_mode(j.at("mode").get<std::string>());
    const auto& tol = j.at("bf_tolerance");
    if (tol.is_number_integer()) r.bf_tolerance = tol.get<int>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed metrics report: ") + e.what());
  }
}

}  // namespace damseg
