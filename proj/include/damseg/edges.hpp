#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "damseg/mask.hpp"
#include "damseg/raster.hpp"

namespace damseg {

enum class GradientOperator { roberts, prewitt, sobel };

enum class EdgeVariant { roberts, prewitt, sobel, log, zerocross, canny };

inline constexpr std::array<std::string_view, 6> kEdgeVariantNames = {
    "roberts", "prewitt", "sobel", "log", "zerocross", "canny"};

inline std::string_view to_string(EdgeVariant v) {
  return kEdgeVariantNames[static_cast<std::size_t>(v)];
}

inline EdgeVariant parse_edge_variant(std::string_view name) {
  for (std::size_t i = 0; i < kEdgeVariantNames.size(); ++i) {
    if (kEdgeVariantNames[i] == name) return static_cast<EdgeVariant>(i);
  }
  throw ParameterError("unknown edge method '" + std::string(name) +
                       "' (expected roberts|prewitt|sobel|log|zerocross|canny)");
}

// Detector choice plus its knobs. Unset optionals take the per-method
// defaults below.
//
//   gradient family (roberts/prewitt/sobel):
//     edge = magnitude > threshold * max(magnitude), threshold default 0.25.
//     Sobel and Prewitt are additionally thinned to one pixel by
//     non-maximum suppression along the quantized gradient direction when
//     `thin` is set (the default). Roberts responses sit between pixels;
//     each pixel takes the strongest of its four surrounding 2x2 responses.
//   log:       Laplacian-of-Gaussian kernel of radius ceil(3 sigma), sigma
//              default 2.0.
//   zerocross: Gaussian blur followed by the 3x3 Laplacian, sigma default 2.0.
//     Both mark sign changes between 4-neighbours whose response difference
//     exceeds the slope threshold: threshold * max|response| when a
//     threshold is given, otherwise the mean absolute response.
//   canny:     Gaussian blur (sigma default 1.4), Sobel gradient,
//     non-maximum suppression, hysteresis with low/high fractions of the
//     maximum magnitude (defaults 0.1 / 0.2), 8-connected.
struct EdgeMethod {
  EdgeVariant variant = EdgeVariant::sobel;
  std::optional<double> threshold;
  std::optional<double> sigma;
  double canny_low = 0.1;
  double canny_high = 0.2;
  bool thin = true;

  static constexpr double kDefaultThreshold = 0.25;
  static constexpr double kDefaultLogSigma = 2.0;
  static constexpr double kDefaultCannySigma = 1.4;

  bool is_gradient_family() const {
    return variant == EdgeVariant::roberts || variant == EdgeVariant::prewitt ||
           variant == EdgeVariant::sobel;
  }

  double effective_threshold() const { return threshold.value_or(kDefaultThreshold); }

  double effective_sigma() const {
    return sigma.value_or(variant == EdgeVariant::canny ? kDefaultCannySigma : kDefaultLogSigma);
  }

  void validate() const {
    auto in_open_unit = [](double v) { return v > 0.0 && v < 1.0; };
    if (threshold && !in_open_unit(*threshold)) {
      throw ParameterError("edge threshold must lie in (0,1), got " + std::to_string(*threshold));
    }
    if (sigma && !(*sigma > 0.0 && std::isfinite(*sigma))) {
      throw ParameterError("edge sigma must be > 0, got " + std::to_string(*sigma));
    }
    if (variant == EdgeVariant::canny) {
      if (!in_open_unit(canny_low) || !in_open_unit(canny_high) || canny_low > canny_high) {
        throw ParameterError("canny thresholds must satisfy 0 < low <= high < 1");
      }
    }
  }
};

// Kernels are stored in convolution orientation (mirrored), so that
// convolve2d(ramp x, sobel_x()) is +8: gx estimates +dI/dx and gy +dI/dy
// with y pointing down.
inline Kernel sobel_x() { return Kernel{{1, 0, -1}, {2, 0, -2}, {1, 0, -1}}; }
inline Kernel sobel_y() { return sobel_x().transposed(); }
inline Kernel prewitt_x() { return Kernel{{1, 0, -1}, {1, 0, -1}, {1, 0, -1}}; }
inline Kernel prewitt_y() { return prewitt_x().transposed(); }
// 2x2 Roberts cross embedded in 3x3, anchored at the top-left pixel:
//   gx = I(x,y) - I(x+1,y+1),  gy = I(x+1,y) - I(x,y+1)
inline Kernel roberts_x() { return Kernel{{-1, 0, 0}, {0, 1, 0}, {0, 0, 0}}; }
inline Kernel roberts_y() { return Kernel{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}; }

struct Gradient {
  FloatPlane gx;
  FloatPlane gy;
  FloatPlane magnitude;
};

inline Gradient gradient(const FloatPlane& plane, GradientOperator op) {
  Gradient g;
  switch (op) {
    case GradientOperator::sobel:
      g.gx = convolve2d(plane, sobel_x());
      g.gy = convolve2d(plane, sobel_y());
      break;
    case GradientOperator::prewitt:
      g.gx = convolve2d(plane, prewitt_x());
      g.gy = convolve2d(plane, prewitt_y());
      break;
    case GradientOperator::roberts:
      g.gx = convolve2d(plane, roberts_x());
      g.gy = convolve2d(plane, roberts_y());
      break;
  }
  g.magnitude = FloatPlane(plane.width(), plane.height());
  auto gx = g.gx.data();
  auto gy = g.gy.data();
  auto mag = g.magnitude.data();
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::sqrt(gx[i] * gx[i] + gy[i] * gy[i]);
  return g;
}

inline Gradient gradient(const Raster& img, GradientOperator op) {
  if (!img.is_gray()) throw ParameterError("gradient expects a gray image; convert RGB first");
  return gradient(FloatPlane::from_raster(img), op);
}

namespace detail {

inline std::vector<double> gaussian_taps(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    taps[i + radius] = std::exp(-(i * i) / (2.0 * sigma * sigma));
    sum += taps[i + radius];
  }
  for (double& t : taps) t /= sum;
  return taps;
}

inline FloatPlane gaussian_blur(const FloatPlane& plane, double sigma) {
  const auto taps = gaussian_taps(sigma);
  const int n = static_cast<int>(taps.size());
  return convolve2d(convolve2d(plane, Kernel(n, 1, taps)), Kernel(1, n, taps));
}

inline Kernel log_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  const int n = 2 * radius + 1;
  std::vector<double> w(static_cast<std::size_t>(n) * n);
  const double s2 = sigma * sigma;
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double r2 = (i - radius) * (i - radius) + (j - radius) * (j - radius);
      const double v = (r2 - 2.0 * s2) / (s2 * s2) * std::exp(-r2 / (2.0 * s2));
      w[static_cast<std::size_t>(j) * n + i] = v;
      sum += v;
    }
  }
  // Zero-sum so flat regions respond with exactly nothing.
  const double mean = sum / static_cast<double>(w.size());
  for (double& v : w) v -= mean;
  return Kernel(n, n, std::move(w));
}

// Keeps pixels whose magnitude is a ridge along the gradient direction,
// quantized to 0/45/90/135 degrees. On a two-pixel plateau (an ideal step)
// the pixel on the darker side survives: it must beat the pixel behind it
// strictly and only tie the one ahead. Outside the image counts as zero.
// The rule depends only on the gradient vector, so it commutes with
// 90-degree rotations of the input.
inline EdgeMap non_max_suppression(const Gradient& g) {
  const int w = g.magnitude.width();
  const int h = g.magnitude.height();
  constexpr double tan22 = 0.41421356237309503;  // tan(pi/8)
  auto mag_at = [&](int x, int y) {
    return (x < 0 || y < 0 || x >= w || y >= h) ? 0.0 : g.magnitude.at(x, y);
  };
  auto sgn = [](double v) { return (v > 0) - (v < 0); };
  EdgeMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double m = g.magnitude.at(x, y);
      if (m <= 0.0) continue;
      const double gx = g.gx.at(x, y);
      const double gy = g.gy.at(x, y);
      const double ax = std::abs(gx);
      const double ay = std::abs(gy);
      int dx = 0;
      int dy = 0;
      if (ay <= tan22 * ax) {
        dx = sgn(gx);
      } else if (ax <= tan22 * ay) {
        dy = sgn(gy);
      } else {
        dx = sgn(gx);
        dy = sgn(gy);
      }
      if (m > mag_at(x - dx, y - dy) && m >= mag_at(x + dx, y + dy)) out.set(x, y);
    }
  }
  return out;
}

// Roberts responses live on the (w+1)x(h+1) grid of 2x2 blocks anchored at
// -1..w-1 (edge-replicated). Without thinning each pixel takes the max of its
// four blocks; with thinning a block only reaches its darkest pixel(s), which
// keeps one-pixel lines on the dark side of a step, like the Sobel ridge rule.
inline FloatPlane roberts_centered_magnitude(const FloatPlane& p, bool thin = false) {
  const int w = p.width();
  const int h = p.height();
  FloatPlane out(w, h);
  for (int b = -1; b < h; ++b) {
    for (int a = -1; a < w; ++a) {
      const double d1 = p.clamped(a, b) - p.clamped(a + 1, b + 1);
      const double d2 = p.clamped(a + 1, b) - p.clamped(a, b + 1);
      const double m = std::sqrt(d1 * d1 + d2 * d2);
      const double darkest = std::min({p.clamped(a, b), p.clamped(a + 1, b), p.clamped(a, b + 1),
                                       p.clamped(a + 1, b + 1)});
      for (int y = std::max(b, 0); y <= std::min(b + 1, h - 1); ++y) {
        for (int x = std::max(a, 0); x <= std::min(a + 1, w - 1); ++x) {
          if (thin && p.at(x, y) != darkest) continue;
          out.at(x, y) = std::max(out.at(x, y), m);
        }
      }
    }
  }
  return out;
}

// Responses below this are float residue of filtering flat input.
inline constexpr double kFlatResponse = 1e-6;

inline EdgeMap zero_crossings(const FloatPlane& r, std::optional<double> threshold) {
  const int w = r.width();
  const int h = r.height();
  EdgeMap out(w, h);
  double max_abs = 0.0;
  double sum_abs = 0.0;
  for (double v : r.data()) {
    max_abs = std::max(max_abs, std::abs(v));
    sum_abs += std::abs(v);
  }
  if (max_abs < kFlatResponse) return out;
  const double slope =
      threshold ? *threshold * max_abs : sum_abs / static_cast<double>(r.data().size());
  auto check = [&](int x, int y, int qx, int qy) {
    const double a = r.at(x, y);
    const double b = r.at(qx, qy);
    if (a * b < 0.0 && std::abs(a - b) > slope) {
      if (std::abs(a) <= std::abs(b)) {
        out.set(x, y);
      } else {
        out.set(qx, qy);
      }
    }
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x + 1 < w) check(x, y, x + 1, y);
      if (y + 1 < h) check(x, y, x, y + 1);
    }
  }
  return out;
}

inline EdgeMap threshold_relative(const FloatPlane& mag, double t) {
  EdgeMap out(mag.width(), mag.height());
  const double max = mag.max_value();
  if (max < kFlatResponse) return out;
  const double cut = t * max;
  auto m = mag.data();
  for (std::size_t i = 0; i < m.size(); ++i) out.set_index(i, m[i] > cut);
  return out;
}

inline EdgeMap canny(const FloatPlane& plane, const EdgeMethod& method) {
  const Gradient g = gradient(gaussian_blur(plane, method.effective_sigma()),
                              GradientOperator::sobel);
  const int w = plane.width();
  const int h = plane.height();
  EdgeMap out(w, h);
  const double max = g.magnitude.max_value();
  if (max < kFlatResponse) return out;
  const EdgeMap ridge = non_max_suppression(g);
  const double low = method.canny_low * max;
  const double high = method.canny_high * max;
  std::vector<std::pair<int, int>> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (ridge.at(x, y) && g.magnitude.at(x, y) > high) {
        out.set(x, y);
        stack.emplace_back(x, y);
      }
    }
  }
  while (!stack.empty()) {
    const auto [x, y] = stack.back();
    stack.pop_back();
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h || out.at(nx, ny)) continue;
        if (ridge.at(nx, ny) && g.magnitude.at(nx, ny) > low) {
          out.set(nx, ny);
          stack.emplace_back(nx, ny);
        }
      }
    }
  }
  return out;
}

}  // namespace detail

inline EdgeMap detect_edges(const Raster& img, const EdgeMethod& method = {}) {
  method.validate();
  if (!img.is_gray()) throw ParameterError("detect_edges expects a gray image; convert RGB first");
  const FloatPlane plane = FloatPlane::from_raster(img);
  switch (method.variant) {
    case EdgeVariant::roberts:
      return detail::threshold_relative(detail::roberts_centered_magnitude(plane, method.thin),
                                        method.effective_threshold());
    case EdgeVariant::prewitt:
    case EdgeVariant::sobel: {
      const Gradient g = gradient(plane, method.variant == EdgeVariant::sobel
                                             ? GradientOperator::sobel
                                             : GradientOperator::prewitt);
      EdgeMap out = detail::threshold_relative(g.magnitude, method.effective_threshold());
      if (method.thin) {
        const EdgeMap ridge = detail::non_max_suppression(g);
        for (std::size_t i = 0; i < out.size(); ++i) out.set_index(i, out.test(i) && ridge.test(i));
      }
      return out;
    }
    case EdgeVariant::log:
      return detail::zero_crossings(convolve2d(plane, detail::log_kernel(method.effective_sigma())),
                                    method.threshold);
    case EdgeVariant::zerocross: {
      const Kernel laplacian{{0, 1, 0}, {1, -4, 1}, {0, 1, 0}};
      return detail::zero_crossings(
          convolve2d(detail::gaussian_blur(plane, method.effective_sigma()), laplacian),
          method.threshold);
    }
    case EdgeVariant::canny:
      return detail::canny(plane, method);
  }
  throw ParameterError("unhandled edge variant");
}

// Square structuring element of side 2 * radius + 1.
inline EdgeMap dilate(const EdgeMap& map, int radius) {
  if (radius < 0) throw ParameterError("dilation radius must be >= 0");
  if (radius == 0) return map;
  const int w = map.width();
  const int h = map.height();
  // Separable: horizontal pass, then vertical.
  EdgeMap rows(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!map.at(x, y)) continue;
      for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) rows.set(i, y);
    }
  }
  EdgeMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows.at(x, y)) continue;
      for (int j = std::max(0, y - radius); j <= std::min(h - 1, y + radius); ++j) out.set(x, j);
    }
  }
  return out;
}

}  // namespace damseg
