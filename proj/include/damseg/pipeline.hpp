#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "damseg/mask.hpp"
#include "damseg/png_io.hpp"
#include "damseg/raster.hpp"

namespace damseg {

enum class Split { train, test };
enum class Provenance { real, synthetic };

inline std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }
inline std::string_view to_string(Provenance p) {
  return p == Provenance::real ? "real" : "synthetic";
}

// One stored tile. Paths are relative to the manifest's directory.
struct TileRecord {
  std::string tile_id;
  std::string source_photo_id;
  int source_width = 0;
  int source_height = 0;
  int offset_x = 0;
  int offset_y = 0;
  int native_w = 0;
  int native_h = 0;
  int stored_size = 224;
  Split split = Split::train;
  Provenance provenance = Provenance::real;
  std::string image_path;
  std::string label_path;  // ROI mask, 0/255
  std::optional<std::string> trilabel_path;
  std::optional<std::string> generator_id;
  std::optional<std::string> source_tile_id;
  std::optional<std::uint64_t> generator_seed;

  bool operator==(const TileRecord&) const = default;
};

struct ClassWeights {
  double background = 0.0;
  double roi = 0.0;
  std::uint64_t background_pixels = 0;
  std::uint64_t roi_pixels = 0;

  bool operator==(const ClassWeights&) const = default;
};

struct ManifestParams {
  int tile_size = 224;
  int min_keep = 128;
  std::optional<double> train_fraction;
  bool group_by_photo = true;

  bool operator==(const ManifestParams&) const = default;
};

struct DatasetManifest {
  std::uint64_t rng_seed = 0;
  ManifestParams params;
  std::optional<ClassWeights> class_weights;
  std::vector<TileRecord> records;

  std::size_t count(Split s) const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                  [s](const TileRecord& r) { return r.split == s; }));
  }

  const TileRecord* find(std::string_view tile_id) const {
    for (const auto& r : records)
      if (r.tile_id == tile_id) return &r;
    return nullptr;
  }

  bool operator==(const DatasetManifest&) const = default;
};

// Checks the record-level invariants; throws ContractError on the first
// violation found.
inline void validate_manifest(const DatasetManifest& m) {
  std::set<std::string> ids;
  for (const auto& r : m.records) {
    if (r.tile_id.empty()) throw ContractError("record with empty tile_id");
    if (!ids.insert(r.tile_id).second) throw ContractError("duplicate tile_id " + r.tile_id);
    if (r.offset_x < 0 || r.offset_y < 0 || r.native_w < 1 || r.native_h < 1 ||
        r.offset_x + r.native_w > r.source_width || r.offset_y + r.native_h > r.source_height) {
      throw ContractError("tile " + r.tile_id + " footprint exceeds its source photo");
    }
    if (r.provenance == Provenance::synthetic && !r.generator_id) {
      throw ContractError("synthetic tile " + r.tile_id + " has no generator_id");
    }
    if (r.provenance == Provenance::synthetic && r.split != Split::train) {
      throw ContractError("synthetic tile " + r.tile_id + " is not in the train split");
    }
  }
}

// Child seed mixed from a run seed and an item id (tile or photo), so an
// item's randomness does not depend on which other items share the run.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view item_id) {
  std::vector<std::uint32_t> material{static_cast<std::uint32_t>(seed),
                                      static_cast<std::uint32_t>(seed >> 32)};
  for (unsigned char ch : item_id) material.push_back(ch);
  std::seed_seq seq(material.begin(), material.end());
  std::array<std::uint32_t, 2> words{};
  seq.generate(words.begin(), words.end());
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

// ---------------------------------------------------------------------------
// Tiling

struct TileFootprint {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

// Non-overlapping grid anchored at (0, 0) with stride tile_size; the last
// row/column holds the remainder strips.
inline std::vector<TileFootprint> tile_grid(int width, int height, int tile_size) {
  std::vector<TileFootprint> cells;
  for (int y = 0; y < height; y += tile_size)
    for (int x = 0; x < width; x += tile_size)
      cells.push_back({x, y, std::min(tile_size, width - x), std::min(tile_size, height - y)});
  return cells;
}

struct TileParams {
  int tile_size = 224;
  int min_keep = 128;
};

struct Tile {
  Raster image;
  RoiMask roi;
  TileRecord record;
};

inline std::string tile_id_for(std::string_view photo_id, int x, int y) {
  return std::string(photo_id) + "_x" + std::to_string(x) + "_y" + std::to_string(y);
}

// Grid tiles of one photo. A cell is kept when both native sides are at
// least min_keep and its ROI is non-empty; short cells are resized up to
// tile_size (image bilinear, ROI nearest). Records get ids and offsets but
// no paths.
inline std::vector<Tile> tile(std::string_view photo_id, const Raster& photo, const RoiMask& roi,
                              const TileParams& params = {}) {
  if (!(params.tile_size > params.min_keep && params.min_keep > 0)) {
    throw ParameterError("tiling requires tile_size > min_keep > 0");
  }
  if (!roi.same_shape(photo)) {
    throw DimensionError("photo " + std::string(photo_id) + " is " +
                         shape_string(photo.width(), photo.height()) + " but its ROI mask is " +
                         shape_string(roi.width(), roi.height()));
  }
  std::vector<Tile> tiles;
  for (const auto& cell : tile_grid(photo.width(), photo.height(), params.tile_size)) {
    if (cell.width < params.min_keep || cell.height < params.min_keep) continue;
    RoiMask tile_roi = resize_mask(crop_mask(roi, cell.x, cell.y, cell.width, cell.height),
                                   params.tile_size, params.tile_size);
    if (tile_roi.none()) continue;
    Raster tile_img = resize_bilinear(crop(photo, cell.x, cell.y, cell.width, cell.height),
                                      params.tile_size, params.tile_size);
    TileRecord rec;
    rec.tile_id = tile_id_for(photo_id, cell.x, cell.y);
    rec.source_photo_id = std::string(photo_id);
    rec.source_width = photo.width();
    rec.source_height = photo.height();
    rec.offset_x = cell.x;
    rec.offset_y = cell.y;
    rec.native_w = cell.width;
    rec.native_h = cell.height;
    rec.stored_size = params.tile_size;
    tiles.push_back({std::move(tile_img), std::move(tile_roi), std::move(rec)});
  }
  return tiles;
}

// ---------------------------------------------------------------------------
// Class weights

// Median-frequency balancing over {background, roi}:
//   weight_c = median(count) / count_c
// With two classes the median is the mean of the two counts.
inline ClassWeights class_weights(std::uint64_t background_pixels, std::uint64_t roi_pixels) {
  if (background_pixels == 0 || roi_pixels == 0) {
    throw ContractError(std::string("class ") + (roi_pixels == 0 ? "roi" : "background") +
                        " is absent from the dataset; its weight is undefined");
  }
  const double median =
      (static_cast<double>(background_pixels) + static_cast<double>(roi_pixels)) / 2.0;
  return {median / static_cast<double>(background_pixels),
          median / static_cast<double>(roi_pixels), background_pixels, roi_pixels};
}

inline ClassWeights class_weights(std::span<const RoiMask> masks) {
  if (masks.empty()) throw ParameterError("class_weights needs at least one tile");
  std::uint64_t roi = 0;
  std::uint64_t total = 0;
  for (const auto& m : masks) {
    roi += m.count();
    total += m.size();
  }
  return class_weights(total - roi, roi);
}

// ---------------------------------------------------------------------------
// Partition

inline std::size_t train_count_for(std::size_t n, double fraction) {
  // Round half up; the epsilon absorbs representation error in `fraction`.
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 0.5 + 1e-9));
}

// Seeded shuffle into train/test. Per-tile mode hits round-half-up(N * f)
// exactly. Grouped mode keeps every tile of a source photo together: groups
// are visited in shuffled order and go to train while they fit under the
// target, so the train count is at most the target (exact when every photo
// contributes one tile).
inline DatasetManifest partition(DatasetManifest manifest, double train_fraction,
                                 std::uint64_t seed, bool group_by_photo = true) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ParameterError("train fraction must lie in (0,1)");
  }
  auto& recs = manifest.records;
  if (recs.empty()) throw ParameterError("cannot partition an empty manifest");
  for (const auto& r : recs) {
    if (r.provenance == Provenance::synthetic) {
      throw ContractError("partition must run before synthetic tiles are merged (found " +
                          r.tile_id + ")");
    }
  }
  const std::size_t target = train_count_for(recs.size(), train_fraction);
  std::mt19937_64 rng(seed);

  if (!group_by_photo) {
    std::vector<std::size_t> order(recs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t k = 0; k < order.size(); ++k)
      recs[order[k]].split = k < target ? Split::train : Split::test;
  } else {
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < recs.size(); ++i) groups[recs[i].source_photo_id].push_back(i);
    std::vector<const std::vector<std::size_t>*> order;
    for (const auto& [_, members] : groups) order.push_back(&members);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t train = 0;
    for (const auto* members : order) {
      const bool fits = train + members->size() <= target;
      if (fits) train += members->size();
      for (std::size_t i : *members) recs[i].split = fits ? Split::train : Split::test;
    }
  }
  manifest.rng_seed = seed;
  manifest.params.train_fraction = train_fraction;
  manifest.params.group_by_photo = group_by_photo;
  return manifest;
}

// ---------------------------------------------------------------------------
// Random crops

struct Crop {
  Raster image;
  RoiMask roi;
  int offset_x = 0;
  int offset_y = 0;
};

struct CropParams {
  int count = 64;
  int crop_size = 224;
  // A crop without ROI is redrawn up to this many times, then kept anyway.
  int max_retries = 16;
};

// Size of the frame crops are drawn from: the photo itself, or the photo
// upscaled so its shorter side equals crop_size.
inline std::pair<int, int> crop_frame(int width, int height, int crop_size) {
  if (width >= crop_size && height >= crop_size) return {width, height};
  const double scale = std::max(static_cast<double>(crop_size) / width,
                                static_cast<double>(crop_size) / height);
  return {std::max(crop_size, static_cast<int>(std::ceil(width * scale - 1e-9))),
          std::max(crop_size, static_cast<int>(std::ceil(height * scale - 1e-9)))};
}

// `count` aligned crops at uniform offsets. Photos smaller than crop_size
// in either side are first upscaled (bilinear image, nearest ROI) so the
// shorter side equals crop_size. Offsets refer to the (possibly upscaled)
// photo.
inline std::vector<Crop> random_crops(const Raster& photo, const RoiMask& roi, std::uint64_t seed,
                                      const CropParams& params = {}) {
  if (params.count < 0 || params.crop_size < 1 || params.max_retries < 0) {
    throw ParameterError("invalid crop parameters");
  }
  if (!roi.same_shape(photo)) {
    throw DimensionError("photo is " + shape_string(photo.width(), photo.height()) +
                         " but ROI mask is " + shape_string(roi.width(), roi.height()));
  }
  Raster src = photo;
  RoiMask src_roi = roi;
  const int cs = params.crop_size;
  const auto [w, h] = crop_frame(photo.width(), photo.height(), cs);
  if (w != photo.width() || h != photo.height()) {
    src = resize_bilinear(photo, w, h);
    src_roi = resize_mask(roi, w, h);
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dx(0, src.width() - cs);
  std::uniform_int_distribution<int> dy(0, src.height() - cs);
  std::vector<Crop> crops;
  crops.reserve(static_cast<std::size_t>(params.count));
  for (int k = 0; k < params.count; ++k) {
    int x = 0;
    int y = 0;
    RoiMask crop_roi;
    for (int attempt = 0; attempt <= params.max_retries; ++attempt) {
      x = dx(rng);
      y = dy(rng);
      crop_roi = crop_mask(src_roi, x, y, cs, cs);
      if (!crop_roi.none()) break;
    }
    crops.push_back({crop(src, x, y, cs, cs), std::move(crop_roi), x, y});
  }
  return crops;
}

// ---------------------------------------------------------------------------
// Manifest serialization: JSON lines. Line 1 is the header object, every
// following line one TileRecord.

inline nlohmann::json to_json(const TileRecord& r) {
  nlohmann::json j = {{"tile_id", r.tile_id},
                      {"source_photo_id", r.source_photo_id},
                      {"source_width", r.source_width},
                      {"source_height", r.source_height},
                      {"offset_x", r.offset_x},
                      {"offset_y", r.offset_y},
                      {"native_w", r.native_w},
                      {"native_h", r.native_h},
                      {"stored_size", r.stored_size},
                      {"split", std::string(to_string(r.split))},
                      {"provenance", std::string(to_string(r.provenance))},
                      {"image_path", r.image_path},
                      {"label_path", r.label_path}};
  if (r.trilabel_path) j["trilabel_path"] = *r.trilabel_path;
  if (r.generator_id) j["generator_id"] = *r.generator_id;
  if (r.source_tile_id) j["source_tile_id"] = *r.source_tile_id;
  if (r.generator_seed) j["generator_seed"] = *r.generator_seed;
  return j;
}

inline TileRecord tile_record_from_json(const nlohmann::json& j) {
  TileRecord r;
  r.tile_id = j.at("tile_id").get<std::string>();
  r.source_photo_id = j.at("source_photo_id").get<std::string>();
  r.source_width = j.at("source_width").get<int>();
  r.source_height = j.at("source_height").get<int>();
  r.offset_x = j.at("offset_x").get<int>();
  r.offset_y = j.at("offset_y").get<int>();
  r.native_w = j.at("native_w").get<int>();
  r.native_h = j.at("native_h").get<int>();
  r.stored_size = j.at("stored_size").get<int>();
  const auto split = j.at("split").get<std::string>();
  if (split != "train" && split != "test") throw FormatError("bad split '" + split + "'");
  r.split = split == "train" ? Split::train : Split::test;
  const auto prov = j.at("provenance").get<std::string>();
  if (prov != "real" && prov != "synthetic") throw FormatError("bad provenance '" + prov + "'");
  r.provenance = prov == "real" ? Provenance::real : Provenance::synthetic;
  r.image_path = j.at("image_path").get<std::string>();
  r.label_path = j.at("label_path").get<std::string>();
  if (j.contains("trilabel_path")) r.trilabel_path = j.at("trilabel_path").get<std::string>();
  if (j.contains("generator_id")) r.generator_id = j.at("generator_id").get<std::string>();
  if (j.contains("source_tile_id")) r.source_tile_id = j.at("source_tile_id").get<std::string>();
  if (j.contains("generator_seed")) r.generator_seed = j.at("generator_seed").get<std::uint64_t>();
  return r;
}

inline nlohmann::json manifest_header_json(const DatasetManifest& m) {
  nlohmann::json params = {{"tile_size", m.params.tile_size},
                           {"min_keep", m.params.min_keep},
                           {"group_by_photo", m.params.group_by_photo}};
  params["train_fraction"] =
      m.params.train_fraction ? nlohmann::json(*m.params.train_fraction) : nlohmann::json(nullptr);
  nlohmann::json weights = nullptr;
  if (m.class_weights) {
    weights = {{"background", m.class_weights->background},
               {"roi", m.class_weights->roi},
               {"background_pixels", m.class_weights->background_pixels},
               {"roi_pixels", m.class_weights->roi_pixels}};
  }
  return {{"format", "damseg-manifest"},
          {"version", 1},
          {"rng_seed", m.rng_seed},
          {"params", params},
          {"class_weights", weights}};
}

inline std::string serialize_manifest(const DatasetManifest& m) {
  std::string out = manifest_header_json(m).dump() + "\n";
  for (const auto& r : m.records) out += to_json(r).dump() + "\n";
  return out;
}

inline DatasetManifest parse_manifest(std::string_view text) {
  DatasetManifest m;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto j = nlohmann::json::parse(line);
      if (!have_header) {
        if (j.value("format", "") != "damseg-manifest") {
          throw FormatError("first line is not a damseg manifest header");
        }
        m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        const auto& p = j.at("params");
        m.params.tile_size = p.at("tile_size").get<int>();
        m.params.min_keep = p.at("min_keep").get<int>();
        m.params.group_by_photo = p.at("group_by_photo").get<bool>();
        if (!p.at("train_fraction").is_null())
          m.params.train_fraction = p.at("train_fraction").get<double>();
        const auto& w = j.at("class_weights");
        if (!w.is_null()) {
          m.class_weights = ClassWeights{w.at("background").get<double>(), w.at("roi").get<double>(),
                                         w.at("background_pixels").get<std::uint64_t>(),
                                         w.at("roi_pixels").get<std::uint64_t>()};
        }
        have_header = true;
      } else {
        m.records.push_back(tile_record_from_json(j));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError("manifest line " + std::to_string(lineno) + ": " + e.what());
  }
  if (!have_header) throw FormatError("manifest is empty");
  validate_manifest(m);
  return m;
}

// Re-expresses every record path, relative to `from_dir`, relative to
// `to_dir` instead.
inline DatasetManifest rebase_paths(DatasetManifest m, const std::filesystem::path& from_dir,
                                    const std::filesystem::path& to_dir) {
  namespace fs = std::filesystem;
  const auto from = fs::absolute(from_dir);
  const auto to = fs::absolute(to_dir);
  if (from.lexically_normal() == to.lexically_normal()) return m;
  auto rebase = [&](std::string& p) {
    p = fs::proximate((from / p).lexically_normal(), to).generic_string();
  };
  for (auto& r : m.records) {
    rebase(r.image_path);
    rebase(r.label_path);
    if (r.trilabel_path) rebase(*r.trilabel_path);
  }
  return m;
}

inline DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_manifest(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

inline void write_manifest(const std::filesystem::path& path, const DatasetManifest& m) {
  validate_manifest(m);
  const std::string text = serialize_manifest(m);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace damseg
