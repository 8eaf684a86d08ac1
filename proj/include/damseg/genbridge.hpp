#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "damseg/labels.hpp"
#include "damseg/pipeline.hpp"
#include "damseg/png_io.hpp"

namespace damseg {

// Generator boundary
// ------------------
// A generator sees a directory of `<tile_id>.png` tri-labels (raw 0/1/2
// single-channel) and must fill an output directory with one same-named,
// same-sized 8-bit RGB PNG per label. External generators are started as
// one shell command with `{in}` and `{out}` replaced by the two directories.

enum class GeneratorKind { reference, external };

using Rgb = std::array<std::uint8_t, 3>;

struct ReferencePalette {
  Rgb background{96, 96, 96};
  Rgb edge{200, 200, 200};
  Rgb roi{150, 75, 40};
};

struct GeneratorSpec {
  std::string generator_id = "reference";
  GeneratorKind kind = GeneratorKind::reference;
  std::string command_template;  // external only
  std::uint64_t seed = 0;
  int noise_amplitude = 10;      // reference only
  ReferencePalette palette;      // reference only

  void validate() const {
    if (generator_id.empty()) throw ParameterError("generator_id must not be empty");
    if (kind == GeneratorKind::external) {
      if (command_template.find("{in}") == std::string::npos ||
          command_template.find("{out}") == std::string::npos) {
        throw ParameterError("external generator command must contain {in} and {out}: " +
                             command_template);
      }
    }
    if (noise_amplitude < 0 || noise_amplitude > 255) {
      throw ParameterError("noise amplitude must lie in [0,255]");
    }
  }
};

// Class-colour fill plus independent uniform integer noise in
// [-amplitude, amplitude] per sample, clamped to [0,255].
inline Raster reference_generate(const TriLabel& label, std::uint64_t seed, int noise_amplitude = 10,
                                 const ReferencePalette& palette = {}) {
  Raster out(label.width(), label.height(), 3);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> noise(-noise_amplitude, noise_amplitude);
  for (int y = 0; y < label.height(); ++y) {
    for (int x = 0; x < label.width(); ++x) {
      const Rgb& base = label.at(x, y) == LabelClass::roi    ? palette.roi
                        : label.at(x, y) == LabelClass::edge ? palette.edge
                                                             : palette.background;
      for (int c = 0; c < 3; ++c) {
        const int n = noise_amplitude > 0 ? noise(rng) : 0;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(base[c] + n, 0, 255));
      }
    }
  }
  return out;
}

struct SyntheticItem {
  std::string trilabel_path;
  std::string image_path;
  std::string source_tile_id;
  std::string generator_id;
  std::uint64_t seed = 0;

  bool operator==(const SyntheticItem&) const = default;
};

struct SyntheticBatch {
  std::vector<SyntheticItem> items;

  bool operator==(const SyntheticBatch&) const = default;
};

struct LabeledTile {
  std::string tile_id;
  TriLabel label;
};

inline std::string shell_quote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  return out + "'";
}

inline std::string expand_command(const std::string& tmpl, const std::filesystem::path& in,
                                  const std::filesystem::path& out) {
  std::string cmd;
  for (std::size_t i = 0; i < tmpl.size();) {
    if (tmpl.compare(i, 4, "{in}") == 0) {
      cmd += shell_quote(in.string());
      i += 4;
    } else if (tmpl.compare(i, 5, "{out}") == 0) {
      cmd += shell_quote(out.string());
      i += 5;
    } else {
      cmd += tmpl[i++];
    }
  }
  return cmd;
}

// Verifies the output directory against the protocol; collects every
// problem before throwing.
inline void validate_generator_output(std::span<const LabeledTile> tiles,
                                      const std::filesystem::path& out_dir) {
  std::vector<std::string> missing;
  std::vector<std::string> problems;
  for (const auto& t : tiles) {
    const auto path = out_dir / (t.tile_id + ".png");
    if (!std::filesystem::exists(path)) {
      missing.push_back(t.tile_id);
      continue;
    }
    try {
      const Raster img = read_png(path);
      if (img.channels() != 3) {
        problems.push_back(t.tile_id + ".png: expected RGB, got " +
                           std::to_string(img.channels()) + " channel(s)");
      }
      if (img.width() != t.label.width() || img.height() != t.label.height()) {
        problems.push_back(t.tile_id + ".png: size " + shape_string(img.width(), img.height()) +
                           " != label " + shape_string(t.label.width(), t.label.height()));
      }
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
  }
  if (missing.empty() && problems.empty()) return;
  std::string msg = "generator output in " + out_dir.string() + " violates the protocol";
  if (!missing.empty()) {
    msg += "; missing outputs for:";
    for (const auto& m : missing) msg += " " + m;
  }
  for (const auto& p : problems) msg += "; " + p;
  throw ContractError(msg);
}

namespace detail {

struct CommandResult {
  int exit_code = 0;
  std::string output;
};

inline CommandResult run_command(const std::string& cmd) {
  CommandResult r;
  FILE* pipe = popen((cmd + " 2>&1").c_str(), "r");
  if (!pipe) throw IoError("cannot start generator command: " + cmd);
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) r.output.append(buf.data(), n);
  const int status = pclose(pipe);
  r.exit_code = (status != -1 && WIFEXITED(status)) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace detail

// Writes the labels to <workdir>/in, runs the generator into <workdir>/out,
// validates the result and returns one batch item per label (absolute
// paths). Both subdirectories are recreated on every call.
inline SyntheticBatch run_generator(std::span<const LabeledTile> tiles, const GeneratorSpec& spec,
                                    const std::filesystem::path& workdir) {
  spec.validate();
  SyntheticBatch batch;
  if (tiles.empty()) return batch;
  std::set<std::string> ids;
  for (const auto& t : tiles) {
    if (!ids.insert(t.tile_id).second) throw ContractError("duplicate tile_id " + t.tile_id);
  }
  const auto root = std::filesystem::absolute(workdir);
  const auto in_dir = root / "in";
  const auto out_dir = root / "out";
  std::filesystem::remove_all(in_dir);
  std::filesystem::remove_all(out_dir);
  std::filesystem::create_directories(in_dir);
  std::filesystem::create_directories(out_dir);
  for (const auto& t : tiles) write_label_png(in_dir / (t.tile_id + ".png"), t.label);

  if (spec.kind == GeneratorKind::reference) {
    for (const auto& t : tiles) {
      write_png(out_dir / (t.tile_id + ".png"),
                reference_generate(t.label, derive_seed(spec.seed, t.tile_id),
                                   spec.noise_amplitude, spec.palette));
    }
  } else {
    const auto cmd = expand_command(spec.command_template, in_dir, out_dir);
    const auto result = detail::run_command(cmd);
    if (result.exit_code != 0) {
      throw ContractError("generator command exited with status " +
                          std::to_string(result.exit_code) + ": " + cmd + "\n" + result.output);
    }
  }
  validate_generator_output(tiles, out_dir);

  for (const auto& t : tiles) {
    batch.items.push_back({(in_dir / (t.tile_id + ".png")).string(),
                           (out_dir / (t.tile_id + ".png")).string(), t.tile_id,
                           spec.generator_id, spec.seed});
  }
  return batch;
}

inline std::string synthetic_tile_id(std::string_view source_tile_id,
                                     std::string_view generator_id) {
  return std::string(source_tile_id) + "__" + std::string(generator_id);
}

// Adds one synthetic train record per batch item. The label is the source
// tile's own label file; only the image comes from the generator. Item
// image paths are stored as given, so callers pass them relative to the
// manifest directory.
inline DatasetManifest merge_synthetic(DatasetManifest manifest, const SyntheticBatch& batch) {
  std::vector<TileRecord> added;
  for (const auto& item : batch.items) {
    const TileRecord* src = manifest.find(item.source_tile_id);
    if (!src) throw ContractError("batch references unknown tile " + item.source_tile_id);
    if (src->split != Split::train) {
      throw ContractError("batch references test tile " + item.source_tile_id +
                          "; synthetic data must stay out of the test split");
    }
    if (src->provenance != Provenance::real) {
      throw ContractError("batch source " + item.source_tile_id + " is itself synthetic");
    }
    TileRecord rec = *src;
    rec.tile_id = synthetic_tile_id(src->tile_id, item.generator_id);
    rec.provenance = Provenance::synthetic;
    rec.split = Split::train;
    rec.image_path = item.image_path;
    rec.generator_id = item.generator_id;
    rec.source_tile_id = src->tile_id;
    rec.generator_seed = item.seed;
    added.push_back(std::move(rec));
  }
  manifest.records.insert(manifest.records.end(), added.begin(), added.end());
  validate_manifest(manifest);
  return manifest;
}

// Batch file: JSON lines, one item per line, paths relative to the batch
// file's directory.
inline void write_batch(const std::filesystem::path& path, const SyntheticBatch& batch) {
  const auto base = std::filesystem::absolute(path).parent_path();
  std::string text;
  for (const auto& it : batch.items) {
    const nlohmann::json j = {
        {"trilabel_path", std::filesystem::proximate(it.trilabel_path, base).generic_string()},
        {"image_path", std::filesystem::proximate(it.image_path, base).generic_string()},
        {"source_tile_id", it.source_tile_id},
        {"generator_id", it.generator_id},
        {"seed", it.seed}};
    text += j.dump() + "\n";
  }
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// Paths come back absolute.
inline SyntheticBatch read_batch(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open batch " + path.string());
  const auto base = std::filesystem::absolute(path).parent_path();
  SyntheticBatch batch;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      batch.items.push_back(
          {(base / j.at("trilabel_path").get<std::string>()).lexically_normal().string(),
           (base / j.at("image_path").get<std::string>()).lexically_normal().string(),
           j.at("source_tile_id").get<std::string>(), j.at("generator_id").get<std::string>(),
           j.value("seed", std::uint64_t{0})});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return batch;
}

}  // namespace damseg
