#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "damseg/raster.hpp"

namespace damseg {

// Binary per-pixel mask. The tag keeps ROI masks and edge maps from being
// mixed up at call sites; the representation is identical.
template <typename Tag>
class BinaryMask {
 public:
  BinaryMask() = default;

  BinaryMask(int width, int height, bool fill = false) : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw DimensionError("mask must be at least 1x1, got " + shape_string(width, height));
    }
    bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool v = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = v ? 1 : 0;
  }

  bool test(std::size_t i) const { return bits_[i] != 0; }
  void set_index(std::size_t i, bool v = true) { bits_[i] = v ? 1 : 0; }

  std::size_t count() const {
    return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
  }
  bool none() const { return count() == 0; }

  bool same_shape(int width, int height) const { return width_ == width && height_ == height; }
  template <typename Other>
  bool same_shape(const Other& other) const {
    return same_shape(other.width(), other.height());
  }

  bool operator==(const BinaryMask&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct RoiTag {};
struct EdgeTag {};

using RoiMask = BinaryMask<RoiTag>;
using EdgeMap = BinaryMask<EdgeTag>;

// Any nonzero sample (after luma conversion) marks the pixel as set, so both
// 0/1 index masks and 0/255 display masks are accepted.
template <typename Mask>
Mask mask_from_raster(const Raster& img) {
  const Raster gray = to_grayscale(img);
  Mask mask(gray.width(), gray.height());
  auto src = gray.data();
  for (std::size_t i = 0; i < src.size(); ++i) mask.set_index(i, src[i] != 0);
  return mask;
}

// 0 / 255 gray raster.
template <typename Mask>
Raster mask_to_raster(const Mask& mask) {
  Raster out(mask.width(), mask.height(), 1);
  auto dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = mask.test(i) ? 255 : 0;
  return out;
}

template <typename Mask>
Mask crop_mask(const Mask& mask, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || x0 + width > mask.width() || y0 + height > mask.height()) {
    throw DimensionError("mask crop exceeds " + shape_string(mask.width(), mask.height()));
  }
  Mask out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) out.set(x, y, mask.at(x0 + x, y0 + y));
  return out;
}

template <typename Mask>
Mask resize_mask(const Mask& mask, int width, int height) {
  if (mask.same_shape(width, height)) return mask;
  Mask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = nearest_source(y, mask.height(), height);
    for (int x = 0; x < width; ++x) out.set(x, y, mask.at(nearest_source(x, mask.width(), width), sy));
  }
  return out;
}

}  // namespace damseg
