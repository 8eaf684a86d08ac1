#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "damseg/mask.hpp"
#include "damseg/png_io.hpp"

namespace damseg {

enum class LabelClass : std::uint8_t { background = 0, edge = 1, roi = 2 };

// Per-pixel class over {background, structure edge, damage ROI}; the
// conditioning input handed to image generators.
class TriLabel {
 public:
  TriLabel() = default;

  TriLabel(int width, int height, LabelClass fill = LabelClass::background)
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw DimensionError("label must be at least 1x1, got " + shape_string(width, height));
    }
    classes_.assign(static_cast<std::size_t>(width) * height, static_cast<std::uint8_t>(fill));
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return classes_.size(); }

  LabelClass at(int x, int y) const {
    return static_cast<LabelClass>(classes_[static_cast<std::size_t>(y) * width_ + x]);
  }
  void set(int x, int y, LabelClass c) {
    classes_[static_cast<std::size_t>(y) * width_ + x] = static_cast<std::uint8_t>(c);
  }
  LabelClass at_index(std::size_t i) const { return static_cast<LabelClass>(classes_[i]); }
  void set_index(std::size_t i, LabelClass c) { classes_[i] = static_cast<std::uint8_t>(c); }

  // Pixel counts indexed by LabelClass value.
  std::array<std::size_t, 3> class_counts() const {
    std::array<std::size_t, 3> counts{};
    for (std::uint8_t c : classes_) ++counts[c];
    return counts;
  }

  std::span<const std::uint8_t> raw() const { return classes_; }

  bool operator==(const TriLabel&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> classes_;
};

// ROI wins over edge, edge over background.
inline TriLabel compose_trilabel(const RoiMask& roi, const EdgeMap& edge) {
  if (!roi.same_shape(edge)) {
    throw DimensionError("roi mask is " + shape_string(roi.width(), roi.height()) +
                         " but edge map is " + shape_string(edge.width(), edge.height()));
  }
  TriLabel label(roi.width(), roi.height());
  for (std::size_t i = 0; i < label.size(); ++i) {
    if (roi.test(i)) {
      label.set_index(i, LabelClass::roi);
    } else if (edge.test(i)) {
      label.set_index(i, LabelClass::edge);
    }
  }
  return label;
}

struct SplitLabel {
  RoiMask roi;
  EdgeMap edge;
};

// Edge pixels that were covered by ROI at composition time are gone.
inline SplitLabel split_trilabel(const TriLabel& label) {
  SplitLabel out{RoiMask(label.width(), label.height()), EdgeMap(label.width(), label.height())};
  for (std::size_t i = 0; i < label.size(); ++i) {
    const LabelClass c = label.at_index(i);
    out.roi.set_index(i, c == LabelClass::roi);
    out.edge.set_index(i, c == LabelClass::edge);
  }
  return out;
}

// On disk a label is a single-channel 8-bit PNG holding the raw class
// indices 0/1/2; display colours belong to the report module.
inline std::vector<std::uint8_t> encode_label_png(const TriLabel& label) {
  Raster img(label.width(), label.height(), 1,
             std::vector<std::uint8_t>(label.raw().begin(), label.raw().end()));
  return encode_png(img);
}

inline TriLabel label_from_raster(const Raster& img) {
  if (!img.is_gray()) {
    throw FormatError("label PNG must be single-channel, got " + std::to_string(img.channels()) +
                      " channels");
  }
  TriLabel label(img.width(), img.height());
  std::set<int> offending;
  const auto data = img.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i] > 2) {
      offending.insert(data[i]);
    } else {
      label.set_index(i, static_cast<LabelClass>(data[i]));
    }
  }
  if (!offending.empty()) {
    std::string list;
    for (int v : offending) list += (list.empty() ? "" : ", ") + std::to_string(v);
    throw FormatError("label PNG contains values outside {0,1,2}: " + list);
  }
  return label;
}

// Palette-indexed label files are read by index, not by colour.
inline TriLabel decode_label_png(std::span<const std::uint8_t> bytes) {
  return label_from_raster(decode_png(bytes, PaletteMode::indices));
}

inline TriLabel read_label_png(const std::filesystem::path& path) {
  try {
    return decode_label_png(read_file_bytes(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_label_png(const std::filesystem::path& path, const TriLabel& label) {
  write_file_bytes(path, encode_label_png(label));
}

}  // namespace damseg
