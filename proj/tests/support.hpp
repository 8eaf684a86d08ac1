// Shared test generators and brute-force oracles.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "damseg/damseg.hpp"

namespace testsupport {

using namespace damseg;

inline std::mt19937_64& rng() {
  static std::mt19937_64 r(0xda5e6);
  return r;
}

inline int rand_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng()); }
inline double rand_real(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

inline FloatPlane random_plane(int w, int h, double lo = -100, double hi = 100) {
  FloatPlane p(w, h);
  for (auto& v : p.data()) v = rand_real(lo, hi);
  return p;
}

// Small-integer weights keep float sums exact, so oracle comparisons can be ==.
inline Kernel random_int_kernel(int cols, int rows) {
  std::vector<double> w(static_cast<std::size_t>(cols) * rows);
  for (auto& v : w) v = rand_int(-4, 4);
  return Kernel(cols, rows, w);
}

inline FloatPlane random_int_plane(int w, int h) {
  FloatPlane p(w, h);
  for (auto& v : p.data()) v = rand_int(0, 255);
  return p;
}

inline Raster random_gray(int w, int h) {
  Raster r(w, h, 1);
  for (auto& v : r.data()) v = static_cast<std::uint8_t>(rand_int(0, 255));
  return r;
}

inline Raster random_rgb(int w, int h) {
  Raster r(w, h, 3);
  for (auto& v : r.data()) v = static_cast<std::uint8_t>(rand_int(0, 255));
  return r;
}

// Blocky random image: a few filled rectangles on a random background, so
// edge detectors have real structure to find.
inline Raster random_blocks(int w, int h) {
  Raster r(w, h, 1, static_cast<std::uint8_t>(rand_int(0, 255)));
  const int n = rand_int(1, 4);
  for (int k = 0; k < n; ++k) {
    const int x0 = rand_int(0, w - 1), y0 = rand_int(0, h - 1);
    const int x1 = rand_int(x0, w - 1), y1 = rand_int(y0, h - 1);
    const auto v = static_cast<std::uint8_t>(rand_int(0, 255));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) r.at(x, y) = v;
  }
  return r;
}

template <typename Mask = RoiMask>
Mask random_mask(int w, int h, double density = -1) {
  if (density < 0) density = rand_real(0.0, 1.0);
  Mask m(w, h);
  std::bernoulli_distribution bit(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, bit(rng()));
  return m;
}

inline TriLabel random_label(int w, int h) {
  TriLabel l(w, h);
  for (std::size_t i = 0; i < l.size(); ++i) l.set_index(i, static_cast<LabelClass>(rand_int(0, 2)));
  return l;
}

// 90 degree counter-clockwise rotation: out(x, y) = in(W-1-y, x).
inline Raster rotate90(const Raster& in) {
  Raster out(in.height(), in.width(), in.channels());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x)
      for (int c = 0; c < in.channels(); ++c) out.at(x, y, c) = in.at(in.width() - 1 - y, x, c);
  return out;
}

template <typename Tag>
BinaryMask<Tag> rotate90(const BinaryMask<Tag>& in) {
  BinaryMask<Tag> out(in.height(), in.width());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out.set(x, y, in.at(in.width() - 1 - y, x));
  return out;
}

template <typename Tag>
bool subset(const BinaryMask<Tag>& a, const BinaryMask<Tag>& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.test(i) && !b.test(i)) return false;
  return true;
}

// Direct transcription of the convolution sum with clamped coordinates.
inline FloatPlane naive_convolve(const FloatPlane& p, const Kernel& k) {
  FloatPlane out(p.width(), p.height());
  const int cx = k.cols() / 2, cy = k.rows() / 2;
  for (int y = 0; y < p.height(); ++y) {
    for (int x = 0; x < p.width(); ++x) {
      double s = 0.0;
      for (int j = 0; j < k.rows(); ++j) {
        for (int i = 0; i < k.cols(); ++i) {
          const int sx = std::min(std::max(x - i + cx, 0), p.width() - 1);
          const int sy = std::min(std::max(y - j + cy, 0), p.height() - 1);
          s += k.at(i, j) * p.at(sx, sy);
        }
      }
      out.at(x, y) = s;
    }
  }
  return out;
}

// ----------------------------------------------------------------------------
// Metric oracles: per-pixel loops over the definitions.

struct OracleTallies {
  std::uint64_t tp[2]{}, fp[2]{}, fn[2]{};
};

inline OracleTallies oracle_tallies(const RoiMask& gt, const RoiMask& pred) {
  OracleTallies t;
  for (int y = 0; y < gt.height(); ++y) {
    for (int x = 0; x < gt.width(); ++x) {
      for (int c = 0; c < 2; ++c) {
        const bool g = gt.at(x, y) == (c == 1);
        const bool p = pred.at(x, y) == (c == 1);
        if (g && p) ++t.tp[c];
        if (!g && p) ++t.fp[c];
        if (g && !p) ++t.fn[c];
      }
    }
  }
  return t;
}

inline std::optional<double> oracle_ratio(std::uint64_t n, std::uint64_t d) {
  if (d == 0) return std::nullopt;
  return static_cast<double>(n) / static_cast<double>(d);
}

struct Point {
  int x, y;
};

inline std::vector<Point> oracle_boundary(const RoiMask& m, bool cls) {
  std::vector<Point> pts;
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) {
      if (m.at(x, y) != cls) continue;
      bool edge = false;
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        const int nx = x + d[0], ny = y + d[1];
        if (nx < 0 || ny < 0 || nx >= m.width() || ny >= m.height()) continue;
        if (m.at(nx, ny) != cls) edge = true;
      }
      if (edge) pts.push_back({x, y});
    }
  }
  return pts;
}

inline std::size_t oracle_matched(const std::vector<Point>& from, const std::vector<Point>& to,
                                  int tol) {
  std::size_t n = 0;
  for (const auto& a : from) {
    long best = -1;
    for (const auto& b : to) {
      const long d = static_cast<long>(a.x - b.x) * (a.x - b.x) + static_cast<long>(a.y - b.y) * (a.y - b.y);
      if (best < 0 || d < best) best = d;
    }
    if (best >= 0 && best <= static_cast<long>(tol) * tol) ++n;
  }
  return n;
}

inline bool has_class(const RoiMask& m, bool cls) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m.test(i) == cls) return true;
  return false;
}

inline std::optional<double> oracle_bf(const RoiMask& gt, const RoiMask& pred, bool cls, int tol) {
  const bool in_gt = has_class(gt, cls), in_pred = has_class(pred, cls);
  if (!in_gt && !in_pred) return std::nullopt;
  if (in_gt != in_pred) return 0.0;
  const auto bg = oracle_boundary(gt, cls);
  const auto bp = oracle_boundary(pred, cls);
  if (bg.empty() && bp.empty()) return 1.0;
  if (bg.empty() || bp.empty()) return 0.0;
  const double p = static_cast<double>(oracle_matched(bp, bg, tol)) / bp.size();
  const double r = static_cast<double>(oracle_matched(bg, bp, tol)) / bg.size();
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// ----------------------------------------------------------------------------

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("damseg_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p) {
  const auto b = read_file_bytes(p);
  return std::string(b.begin(), b.end());
}

}  // namespace testsupport
