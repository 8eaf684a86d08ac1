#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "damseg/error.hpp"

namespace damseg {

// 8-bit image, 1 (gray) or 3 (RGB) interleaved channels, row-major.
class Raster {
 public:
  Raster() = default;

  Raster(int width, int height, int channels, std::uint8_t fill = 0)
      : Raster(width, height, channels,
               std::vector<std::uint8_t>(checked_size(width, height, channels), fill)) {}

  Raster(int width, int height, int channels, std::vector<std::uint8_t> data)
      : width_(width), height_(height), channels_(channels), data_(std::move(data)) {
    if (data_.size() != checked_size(width, height, channels)) {
      throw DimensionError("raster data length " + std::to_string(data_.size()) +
                           " does not match " + shape_string(width, height) + "x" +
                           std::to_string(channels));
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool is_gray() const { return channels_ == 1; }
  bool empty() const { return data_.empty(); }

  std::uint8_t at(int x, int y, int c = 0) const { return data_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return data_[index(x, y, c)]; }

  std::span<const std::uint8_t> data() const { return data_; }
  std::span<std::uint8_t> data() { return data_; }

  bool operator==(const Raster&) const = default;

 private:
  static std::size_t checked_size(int width, int height, int channels) {
    if (width < 1 || height < 1) {
      throw DimensionError("raster must be at least 1x1, got " + shape_string(width, height));
    }
    if (channels != 1 && channels != 3) {
      throw ParameterError("raster channels must be 1 or 3, got " + std::to_string(channels));
    }
    return static_cast<std::size_t>(width) * height * channels;
  }

  std::size_t index(int x, int y, int c) const {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<std::uint8_t> data_;
};

// Real-valued single-channel plane; the working type for gradient math.
class FloatPlane {
 public:
  FloatPlane() = default;

  FloatPlane(int width, int height, double fill = 0.0)
      : width_(width), height_(height) {
    if (width < 1 || height < 1) {
      throw DimensionError("plane must be at least 1x1, got " + shape_string(width, height));
    }
    data_.assign(static_cast<std::size_t>(width) * height, fill);
  }

  FloatPlane(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width < 1 || height < 1 ||
        data_.size() != static_cast<std::size_t>(width) * height) {
      throw DimensionError("plane data length does not match " + shape_string(width, height));
    }
    for (double v : data_) {
      if (!std::isfinite(v)) throw ParameterError("plane values must be finite");
    }
  }

  static FloatPlane from_raster(const Raster& gray) {
    if (!gray.is_gray()) throw ParameterError("FloatPlane::from_raster expects a gray raster");
    FloatPlane plane(gray.width(), gray.height());
    auto src = gray.data();
    std::copy(src.begin(), src.end(), plane.data_.begin());
    return plane;
  }

  int width() const { return width_; }
  int height() const { return height_; }

  double at(int x, int y) const { return data_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return data_[static_cast<std::size_t>(y) * width_ + x]; }

  // Edge-replicating read: out-of-range coordinates clamp to the border.
  double clamped(int x, int y) const {
    return at(std::clamp(x, 0, width_ - 1), std::clamp(y, 0, height_ - 1));
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  double max_value() const { return *std::max_element(data_.begin(), data_.end()); }

  bool operator==(const FloatPlane&) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

// Odd-sided convolution kernel, row-major; (cols/2, rows/2) is the origin.
class Kernel {
 public:
  Kernel(int cols, int rows, std::vector<double> weights)
      : cols_(cols), rows_(rows), weights_(std::move(weights)) {
    if (cols < 1 || rows < 1 || cols % 2 == 0 || rows % 2 == 0) {
      throw ParameterError("kernel sides must be odd and >= 1, got " + shape_string(cols, rows));
    }
    if (weights_.size() != static_cast<std::size_t>(cols) * rows) {
      throw ParameterError("kernel weight count does not match " + shape_string(cols, rows));
    }
  }

  Kernel(std::initializer_list<std::initializer_list<double>> rows)
      : Kernel(static_cast<int>(rows.begin()->size()), static_cast<int>(rows.size()),
               flatten(rows)) {}

  int cols() const { return cols_; }
  int rows() const { return rows_; }
  double at(int i, int j) const { return weights_[static_cast<std::size_t>(j) * cols_ + i]; }

  Kernel transposed() const {
    std::vector<double> w(weights_.size());
    for (int j = 0; j < rows_; ++j)
      for (int i = 0; i < cols_; ++i) w[static_cast<std::size_t>(i) * rows_ + j] = at(i, j);
    return Kernel(rows_, cols_, std::move(w));
  }

 private:
  static std::vector<double> flatten(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> out;
    const std::size_t width = rows.begin()->size();
    for (const auto& r : rows) {
      if (r.size() != width) throw ParameterError("kernel rows must have equal length");
      out.insert(out.end(), r.begin(), r.end());
    }
    return out;
  }

  int cols_;
  int rows_;
  std::vector<double> weights_;
};

// ITU-R 601 luma, rounded half away from zero. Gray input passes through.
inline Raster to_grayscale(const Raster& img) {
  if (img.is_gray()) return img;
  Raster out(img.width(), img.height(), 1);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const double luma = 0.299 * img.at(x, y, 0) + 0.587 * img.at(x, y, 1) +
                          0.114 * img.at(x, y, 2);
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(luma), 0L, 255L));
    }
  }
  return out;
}

inline Raster to_rgb(const Raster& img) {
  if (!img.is_gray()) return img;
  Raster out(img.width(), img.height(), 3);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = img.at(x, y);
  return out;
}

// True convolution with edge replication:
//   out(x, y) = sum_{i,j} k(i, j) * in(x - i + cx, y - j + cy)
// so a kernel is applied mirrored relative to how it is written.
inline FloatPlane convolve2d(const FloatPlane& plane, const Kernel& kernel) {
  const int cx = kernel.cols() / 2;
  const int cy = kernel.rows() / 2;
  FloatPlane out(plane.width(), plane.height());
  for (int y = 0; y < plane.height(); ++y) {
    for (int x = 0; x < plane.width(); ++x) {
      double acc = 0.0;
      for (int j = 0; j < kernel.rows(); ++j)
        for (int i = 0; i < kernel.cols(); ++i)
          acc += kernel.at(i, j) * plane.clamped(x - i + cx, y - j + cy);
      out.at(x, y) = acc;
    }
  }
  return out;
}

// Rounds and clamps a plane back to 8 bits.
inline Raster quantize(const FloatPlane& plane) {
  Raster out(plane.width(), plane.height(), 1);
  for (int y = 0; y < plane.height(); ++y)
    for (int x = 0; x < plane.width(); ++x)
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(plane.at(x, y)), 0L, 255L));
  return out;
}

inline Raster crop(const Raster& img, int x0, int y0, int width, int height) {
  if (x0 < 0 || y0 < 0 || width < 1 || height < 1 || x0 + width > img.width() ||
      y0 + height > img.height()) {
    throw DimensionError("crop " + shape_string(width, height) + "+" + std::to_string(x0) + "+" +
                         std::to_string(y0) + " exceeds " +
                         shape_string(img.width(), img.height()));
  }
  Raster out(width, height, img.channels());
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x)
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(x0 + x, y0 + y, c);
  return out;
}

// Pixel-center aligned bilinear resampling.
inline Raster resize_bilinear(const Raster& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  Raster out(width, height, img.channels());
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double wy = fy - y0;
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double wx = fx - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double top = img.at(x0, y0, c) * (1 - wx) + img.at(x1, y0, c) * wx;
        const double bottom = img.at(x0, y1, c) * (1 - wx) + img.at(x1, y1, c) * wx;
        out.at(x, y, c) = static_cast<std::uint8_t>(
            std::clamp(std::lround(top * (1 - wy) + bottom * wy), 0L, 255L));
      }
    }
  }
  return out;
}

// Source index of destination pixel `dst` under nearest-neighbour resampling.
inline int nearest_source(int dst, int src_len, int dst_len) {
  return static_cast<int>((2LL * dst + 1) * src_len / (2LL * dst_len));
}

inline Raster resize_nearest(const Raster& img, int width, int height) {
  if (width == img.width() && height == img.height()) return img;
  Raster out(width, height, img.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = nearest_source(y, img.height(), height);
    for (int x = 0; x < width; ++x) {
      const int sx = nearest_source(x, img.width(), width);
      for (int c = 0; c < img.channels(); ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace damseg
