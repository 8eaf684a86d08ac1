// damseg: command-line front end for the damage-segmentation data pipeline.
//
//   edges    photo -> structure-edge map
//   compose  ROI mask + edges -> tri-label (single file or whole manifest)
//   tile     photos + ROI masks -> 224px tiles + manifest
//   weights  manifest -> median-frequency class weights
//   split    manifest -> seeded train/test partition
//   crops    photos + ROI masks -> random aligned crops + manifest
//   gen      train tri-labels -> synthetic images through a generator
//   merge    manifest + synthetic batch -> doubled train set
//   evaluate gt/pred mask directories -> metrics report
//   overlay  photo + gt + pred -> overlay image
//   report   metrics reports -> comparison table

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "damseg/damseg.hpp"

namespace fs = std::filesystem;
using namespace damseg;

namespace {

struct EdgeOptions {
  std::string method = "sobel";
  std::optional<double> threshold;
  std::optional<double> sigma;
  double canny_low = 0.1;
  double canny_high = 0.2;
  int dilate = 0;
  bool no_thin = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--method", method, "roberts|prewitt|sobel|log|zerocross|canny")
        ->capture_default_str();
    cmd->add_option("--threshold", threshold, "fraction in (0,1); gradient default 0.25");
    cmd->add_option("--sigma", sigma, "Gaussian sigma for log/zerocross/canny");
    cmd->add_option("--canny-low", canny_low)->capture_default_str();
    cmd->add_option("--canny-high", canny_high)->capture_default_str();
    cmd->add_option("--dilate", dilate, "square dilation radius in pixels")->capture_default_str();
    cmd->add_flag("--no-thin", no_thin, "keep raw thresholded gradient (no ridge thinning)");
  }

  EdgeMethod method_spec() const {
    EdgeMethod m;
    m.variant = parse_edge_variant(method);
    m.threshold = threshold;
    m.sigma = sigma;
    m.canny_low = canny_low;
    m.canny_high = canny_high;
    m.thin = !no_thin;
    m.validate();
    if (dilate < 0) throw ParameterError("--dilate must be >= 0");
    return m;
  }

  EdgeMap run(const Raster& photo) const {
    return damseg::dilate(detect_edges(to_grayscale(photo), method_spec()), dilate);
  }
};

void require_file(const fs::path& p) {
  if (!fs::is_regular_file(p)) throw IoError("no such file: " + p.string());
}

void require_dir(const fs::path& p) {
  if (!fs::is_directory(p)) throw IoError("no such directory: " + p.string());
}

std::vector<fs::path> list_pngs(const fs::path& dir) {
  require_dir(dir);
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

fs::path manifest_dir(const fs::path& manifest) {
  return fs::absolute(manifest).parent_path();
}

fs::path resolve(const fs::path& base, const std::string& rel) { return base / rel; }

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

// ----------------------------------------------------------------------------

struct PhotoPair {
  std::string id;
  fs::path photo;
  fs::path roi;
};

std::vector<PhotoPair> pair_photos(const fs::path& photos, const fs::path& rois) {
  require_dir(rois);
  std::vector<PhotoPair> pairs;
  std::vector<std::string> missing;
  for (const auto& p : list_pngs(photos)) {
    const auto roi = rois / p.filename();
    if (!fs::is_regular_file(roi)) {
      missing.push_back(roi.string());
      continue;
    }
    pairs.push_back({p.stem().string(), p, roi});
  }
  if (!missing.empty()) {
    std::string msg = "ROI mask missing for photo(s):";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg);
  }
  if (pairs.empty()) throw IoError("no PNG photos in " + photos.string());
  return pairs;
}

int cmd_edges(const EdgeOptions& opt, const fs::path& in, const fs::path& out) {
  opt.method_spec();  // reject bad options before touching files
  require_file(in);
  write_png(out, mask_to_raster(opt.run(read_png(in))));
  return 0;
}

struct ComposeArgs {
  fs::path roi, photo, edge, output, manifest, out_manifest;
};

int cmd_compose(const EdgeOptions& opt, const ComposeArgs& a, unsigned jobs) {
  opt.method_spec();
  if (!a.manifest.empty()) {
    if (a.out_manifest.empty()) throw ParameterError("--manifest requires --out");
    require_file(a.manifest);
    const auto src_dir = manifest_dir(a.manifest);
    const auto dst_dir = manifest_dir(a.out_manifest);
    DatasetManifest m = read_manifest(a.manifest);
    parallel_for(m.records.size(), jobs, [&](std::size_t i) {
      auto& r = m.records[i];
      if (r.provenance != Provenance::real) return;
      const Raster img = read_png(resolve(src_dir, r.image_path));
      const RoiMask roi = mask_from_raster<RoiMask>(read_png(resolve(src_dir, r.label_path)));
      const fs::path rel = fs::path("trilabels") / (r.tile_id + ".png");
      write_label_png(dst_dir / rel, compose_trilabel(roi, opt.run(img)));
      // Stored relative to the source dir so the final rebase is uniform.
      r.trilabel_path = fs::proximate(dst_dir / rel, src_dir).generic_string();
    });
    write_manifest(a.out_manifest, rebase_paths(std::move(m), src_dir, dst_dir));
    return 0;
  }
  if (a.roi.empty() || a.output.empty()) {
    throw ParameterError("compose needs --roi and an output path (or --manifest/--out)");
  }
  if (a.photo.empty() == a.edge.empty()) {
    throw ParameterError("compose needs exactly one of --photo or --edge");
  }
  require_file(a.roi);
  const RoiMask roi = mask_from_raster<RoiMask>(read_png(a.roi));
  EdgeMap edge;
  if (!a.photo.empty()) {
    require_file(a.photo);
    edge = opt.run(read_png(a.photo));
  } else {
    require_file(a.edge);
    edge = mask_from_raster<EdgeMap>(read_png(a.edge));
  }
  write_label_png(a.output, compose_trilabel(roi, edge));
  return 0;
}

struct TileArgs {
  fs::path photos, rois, out;
  int tile_size = 224;
  int min_keep = 128;
  std::uint64_t seed = 0;
};

int cmd_tile(const TileArgs& a, unsigned jobs) {
  const auto pairs = pair_photos(a.photos, a.rois);
  const TileParams params{a.tile_size, a.min_keep};
  std::vector<std::vector<TileRecord>> per_photo(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    const Raster photo = read_png(pairs[i].photo);
    const RoiMask roi = mask_from_raster<RoiMask>(read_png(pairs[i].roi));
    for (auto& t : tile(pairs[i].id, photo, roi, params)) {
      t.record.image_path = "images/" + t.record.tile_id + ".png";
      t.record.label_path = "labels/" + t.record.tile_id + ".png";
      write_png(a.out / t.record.image_path, t.image);
      write_png(a.out / t.record.label_path, mask_to_raster(t.roi));
      per_photo[i].push_back(std::move(t.record));
    }
  });
  DatasetManifest m;
  m.rng_seed = a.seed;
  m.params.tile_size = a.tile_size;
  m.params.min_keep = a.min_keep;
  for (auto& recs : per_photo)
    for (auto& r : recs) m.records.push_back(std::move(r));
  write_manifest(a.out / "manifest.jsonl", m);
  std::cout << pairs.size() << " photo(s), " << m.records.size() << " tile(s) kept\n";
  return 0;
}

int cmd_weights(const fs::path& manifest, const fs::path& out, const std::string& split) {
  require_file(manifest);
  if (split != "all" && split != "train" && split != "test") {
    throw ParameterError("--split must be all|train|test");
  }
  const auto dir = manifest_dir(manifest);
  DatasetManifest m = read_manifest(manifest);
  std::vector<RoiMask> masks;
  for (const auto& r : m.records) {
    if (r.provenance != Provenance::real) continue;
    if (split != "all" && to_string(r.split) != split) continue;
    masks.push_back(mask_from_raster<RoiMask>(read_png(resolve(dir, r.label_path))));
  }
  m.class_weights = class_weights(masks);
  write_manifest(out, rebase_paths(std::move(m), dir, manifest_dir(out)));
  const auto& w = *read_manifest(out).class_weights;
  std::cout << fmt::format("roi weight {:.4f}, background weight {:.4f} ({} roi / {} background px)\n",
                           w.roi, w.background, w.roi_pixels, w.background_pixels);
  return 0;
}

int cmd_split(const fs::path& manifest, const fs::path& out, double fraction, std::uint64_t seed,
              bool per_tile) {
  require_file(manifest);
  const auto dir = manifest_dir(manifest);
  DatasetManifest m = partition(read_manifest(manifest), fraction, seed, !per_tile);
  std::cout << m.count(Split::train) << " train / " << m.count(Split::test) << " test\n";
  write_manifest(out, rebase_paths(std::move(m), dir, manifest_dir(out)));
  return 0;
}

struct CropArgs {
  fs::path photos, rois, out;
  int count = 64;
  int crop = 224;
  int max_retries = 16;
  std::uint64_t seed = 0;
};

int cmd_crops(const CropArgs& a, unsigned jobs) {
  const auto pairs = pair_photos(a.photos, a.rois);
  const CropParams params{a.count, a.crop, a.max_retries};
  std::vector<std::vector<TileRecord>> per_photo(pairs.size());
  parallel_for(pairs.size(), jobs, [&](std::size_t i) {
    const Raster photo = read_png(pairs[i].photo);
    const RoiMask roi = mask_from_raster<RoiMask>(read_png(pairs[i].roi));
    const auto crops = random_crops(photo, roi, derive_seed(a.seed, pairs[i].id), params);
    // Offsets live in the upscaled frame when the photo was smaller than a crop.
    const auto [sw, sh] = crop_frame(photo.width(), photo.height(), a.crop);
    for (std::size_t k = 0; k < crops.size(); ++k) {
      TileRecord r;
      r.tile_id = fmt::format("{}_c{:03}", pairs[i].id, k);
      r.source_photo_id = pairs[i].id;
      r.source_width = sw;
      r.source_height = sh;
      r.offset_x = crops[k].offset_x;
      r.offset_y = crops[k].offset_y;
      r.native_w = a.crop;
      r.native_h = a.crop;
      r.stored_size = a.crop;
      r.image_path = "images/" + r.tile_id + ".png";
      r.label_path = "labels/" + r.tile_id + ".png";
      write_png(a.out / r.image_path, crops[k].image);
      write_png(a.out / r.label_path, mask_to_raster(crops[k].roi));
      per_photo[i].push_back(std::move(r));
    }
  });
  DatasetManifest m;
  m.rng_seed = a.seed;
  m.params.tile_size = a.crop;
  for (auto& recs : per_photo)
    for (auto& r : recs) m.records.push_back(std::move(r));
  write_manifest(a.out / "manifest.jsonl", m);
  std::cout << pairs.size() << " photo(s), " << m.records.size() << " crop(s)\n";
  return 0;
}

struct GenArgs {
  fs::path manifest, workdir, batch;
  std::string generator = "reference";
  std::string generator_id;
  std::string cmd;
  std::uint64_t seed = 0;
  int noise = 10;
};

int cmd_gen(const GenArgs& a) {
  require_file(a.manifest);
  GeneratorSpec spec;
  if (a.generator == "reference") {
    spec.kind = GeneratorKind::reference;
  } else if (a.generator == "external") {
    spec.kind = GeneratorKind::external;
    spec.command_template = a.cmd;
  } else {
    throw ParameterError("--generator must be reference|external");
  }
  spec.generator_id = a.generator_id.empty() ? a.generator : a.generator_id;
  spec.seed = a.seed;
  spec.noise_amplitude = a.noise;
  spec.validate();

  const auto dir = manifest_dir(a.manifest);
  const DatasetManifest m = read_manifest(a.manifest);
  std::vector<LabeledTile> tiles;
  for (const auto& r : m.records) {
    if (r.provenance != Provenance::real || r.split != Split::train) continue;
    if (!r.trilabel_path) {
      throw ContractError("train tile " + r.tile_id + " has no tri-label; run compose first");
    }
    tiles.push_back({r.tile_id, read_label_png(resolve(dir, *r.trilabel_path))});
  }
  const fs::path workdir = a.workdir.empty() ? dir / ("gen_" + spec.generator_id) : a.workdir;
  const SyntheticBatch batch = run_generator(tiles, spec, workdir);
  const fs::path batch_path = a.batch.empty() ? workdir / "batch.jsonl" : a.batch;
  write_batch(batch_path, batch);
  std::cout << batch.items.size() << " synthetic image(s) from generator '" << spec.generator_id
            << "'\n";
  return 0;
}

int cmd_merge(const fs::path& manifest, const fs::path& batch_path, const fs::path& out) {
  require_file(manifest);
  require_file(batch_path);
  const auto src_dir = manifest_dir(manifest);
  const auto dst_dir = manifest_dir(out);
  const DatasetManifest m = read_manifest(manifest);
  SyntheticBatch batch = read_batch(batch_path);

  std::vector<std::string> problems;
  for (auto& item : batch.items) {
    const TileRecord* src = m.find(item.source_tile_id);
    if (!fs::is_regular_file(item.image_path)) {
      problems.push_back("missing synthetic image " + item.image_path);
      continue;
    }
    try {
      const Raster img = read_png(item.image_path);
      if (img.channels() != 3) problems.push_back(item.image_path + ": expected RGB");
      if (src && (img.width() != src->stored_size || img.height() != src->stored_size)) {
        problems.push_back(item.image_path + ": size " + shape_string(img.width(), img.height()) +
                           " != tile size " + std::to_string(src->stored_size));
      }
    } catch (const Error& e) {
      problems.push_back(e.what());
    }
    item.image_path = fs::proximate(item.image_path, dst_dir).generic_string();
  }
  if (!problems.empty()) {
    std::string msg = "synthetic batch failed validation";
    for (const auto& p : problems) msg += "; " + p;
    throw ContractError(msg);
  }
  const DatasetManifest merged = merge_synthetic(rebase_paths(m, src_dir, dst_dir), batch);
  write_manifest(out, merged);
  std::cout << merged.count(Split::train) << " train / " << merged.count(Split::test)
            << " test, " << merged.records.size() << " total\n";
  return 0;
}

struct EvalArgs {
  fs::path gt, pred, json;
  std::string mode = "per-image-mean";
  std::optional<int> bf_tolerance;
  std::string label = "run";
};

int cmd_evaluate(const EvalArgs& a, unsigned jobs) {
  const auto mode = parse_aggregation_mode(a.mode);
  if (a.bf_tolerance && *a.bf_tolerance < 0) throw ParameterError("--bf-tolerance must be >= 0");
  const auto gts = list_pngs(a.gt);
  require_dir(a.pred);
  if (gts.empty()) throw IoError("no PNG masks in " + a.gt.string());
  std::vector<std::string> missing;
  for (const auto& g : gts)
    if (!fs::is_regular_file(a.pred / g.filename())) missing.push_back(g.filename().string());
  if (!missing.empty()) {
    std::string msg = "prediction missing for:";
    for (const auto& m : missing) msg += " " + m;
    throw IoError(msg + " (in " + a.pred.string() + ")");
  }
  std::vector<MaskPair> pairs(gts.size());
  parallel_for(gts.size(), jobs, [&](std::size_t i) {
    pairs[i] = {mask_from_raster<RoiMask>(read_png(gts[i])),
                mask_from_raster<RoiMask>(read_png(a.pred / gts[i].filename()))};
    if (!pairs[i].gt.same_shape(pairs[i].pred)) {
      throw DimensionError(gts[i].filename().string() + ": ground truth " +
                           shape_string(pairs[i].gt.width(), pairs[i].gt.height()) +
                           " vs prediction " +
                           shape_string(pairs[i].pred.width(), pairs[i].pred.height()));
    }
  });
  const MetricsReport report = evaluate_run(pairs, mode, a.bf_tolerance);
  if (!a.json.empty()) write_text(a.json, to_json(report).dump(2) + "\n");
  RunComparison cmp;
  cmp.runs.push_back({a.label, report, std::nullopt});
  std::cout << render_comparison(cmp, TableFormat::text);
  return 0;
}

int cmd_overlay(const fs::path& photo, const fs::path& gt, const fs::path& pred,
                const fs::path& out) {
  require_file(photo);
  require_file(gt);
  require_file(pred);
  write_png(out, render_overlay(read_png(photo), mask_from_raster<RoiMask>(read_png(gt)),
                                mask_from_raster<RoiMask>(read_png(pred))));
  return 0;
}

int cmd_report(const std::vector<std::string>& runs, const std::vector<double>& minutes,
               const std::string& format, const fs::path& out) {
  if (!minutes.empty() && minutes.size() != runs.size()) {
    throw ParameterError("--minutes must be given once per --run");
  }
  RunComparison cmp;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto eq = runs[i].find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParameterError("--run expects LABEL=REPORT.json, got '" + runs[i] + "'");
    }
    const fs::path path = runs[i].substr(eq + 1);
    require_file(path);
    const auto bytes = read_file_bytes(path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(bytes.begin(), bytes.end());
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ": " + e.what());
    }
    cmp.runs.push_back({runs[i].substr(0, eq), metrics_report_from_json(j),
                        minutes.empty() ? std::nullopt : std::optional<double>(minutes[i])});
  }
  const std::string text = render_comparison(cmp, parse_table_format(format));
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"damseg: damage-region segmentation data pipeline"};
  app.require_subcommand(1);
  unsigned jobs = default_jobs();
  app.add_option("-j,--jobs", jobs, "parallel workers (default $DAMSEG_JOBS or all cores)");

  EdgeOptions edge_opt;
  fs::path edges_in, edges_out;
  auto* edges = app.add_subcommand("edges", "extract a structure-edge map (0/255 PNG)");
  edge_opt.add_to(edges);
  edges->add_option("input", edges_in, "photo PNG")->required();
  edges->add_option("output", edges_out, "edge map PNG")->required();

  EdgeOptions compose_edge_opt;
  ComposeArgs compose_args;
  auto* compose = app.add_subcommand("compose", "compose tri-labels from ROI masks and edges");
  compose_edge_opt.add_to(compose);
  compose->add_option("--roi", compose_args.roi, "ROI mask PNG");
  compose->add_option("--photo", compose_args.photo, "photo PNG (edges derived from it)");
  compose->add_option("--edge", compose_args.edge, "precomputed edge map PNG");
  compose->add_option("--manifest", compose_args.manifest, "compose every tile of a manifest");
  compose->add_option("--out", compose_args.out_manifest, "output manifest (with --manifest)");
  compose->add_option("output", compose_args.output, "tri-label PNG (single-file mode)");

  TileArgs tile_args;
  auto* tile_cmd = app.add_subcommand("tile", "cut photos into tiles and start a manifest");
  tile_cmd->add_option("--photos", tile_args.photos, "directory of photo PNGs")->required();
  tile_cmd->add_option("--rois", tile_args.rois, "directory of same-named ROI masks")->required();
  tile_cmd->add_option("--out", tile_args.out, "output directory")->required();
  tile_cmd->add_option("--tile-size", tile_args.tile_size)->capture_default_str();
  tile_cmd->add_option("--min-keep", tile_args.min_keep)->capture_default_str();
  tile_cmd->add_option("--seed", tile_args.seed)->capture_default_str();

  fs::path weights_in, weights_out;
  std::string weights_split = "all";
  auto* weights = app.add_subcommand("weights", "compute median-frequency class weights");
  weights->add_option("--manifest", weights_in)->required();
  weights->add_option("--out", weights_out)->required();
  weights->add_option("--split", weights_split, "all|train|test")->capture_default_str();

  fs::path split_in, split_out;
  double split_fraction = 0.95;
  std::uint64_t split_seed = 0;
  bool split_per_tile = false;
  auto* split = app.add_subcommand("split", "seeded train/test partition");
  split->add_option("--manifest", split_in)->required();
  split->add_option("--out", split_out)->required();
  split->add_option("--fraction", split_fraction, "train fraction")->capture_default_str();
  split->add_option("--seed", split_seed)->capture_default_str();
  split->add_flag("--per-tile", split_per_tile, "split tiles independently of their photo");

  CropArgs crop_args;
  auto* crops = app.add_subcommand("crops", "random aligned crops (standard augmentation)");
  crops->add_option("--photos", crop_args.photos)->required();
  crops->add_option("--rois", crop_args.rois)->required();
  crops->add_option("--out", crop_args.out)->required();
  crops->add_option("--count", crop_args.count)->capture_default_str();
  crops->add_option("--crop", crop_args.crop)->capture_default_str();
  crops->add_option("--max-retries", crop_args.max_retries)->capture_default_str();
  crops->add_option("--seed", crop_args.seed)->capture_default_str();

  GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "generate synthetic images from train tri-labels");
  gen->add_option("--manifest", gen_args.manifest)->required();
  gen->add_option("--generator", gen_args.generator, "reference|external")->capture_default_str();
  gen->add_option("--generator-id", gen_args.generator_id);
  gen->add_option("--cmd", gen_args.cmd, "external command template with {in} and {out}");
  gen->add_option("--seed", gen_args.seed)->capture_default_str();
  gen->add_option("--noise", gen_args.noise, "reference noise amplitude")->capture_default_str();
  gen->add_option("--workdir", gen_args.workdir);
  gen->add_option("--batch", gen_args.batch, "batch file (default <workdir>/batch.jsonl)");

  fs::path merge_in, merge_batch, merge_out;
  auto* merge = app.add_subcommand("merge", "merge a synthetic batch into the train split");
  merge->add_option("--manifest", merge_in)->required();
  merge->add_option("--batch", merge_batch)->required();
  merge->add_option("--out", merge_out)->required();

  EvalArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "score predicted masks against ground truth");
  evaluate->add_option("--gt", eval_args.gt)->required();
  evaluate->add_option("--pred", eval_args.pred)->required();
  evaluate->add_option("--mode", eval_args.mode, "per-image-mean|global")->capture_default_str();
  evaluate->add_option("--bf-tolerance", eval_args.bf_tolerance,
                       "BF match distance in px (default 0.75% of the diagonal)");
  evaluate->add_option("--json", eval_args.json, "write the metrics report JSON here");
  evaluate->add_option("--label", eval_args.label)->capture_default_str();

  fs::path ov_photo, ov_gt, ov_pred, ov_out;
  auto* overlay = app.add_subcommand("overlay", "ground truth / prediction overlay");
  overlay->add_option("--photo", ov_photo)->required();
  overlay->add_option("--gt", ov_gt)->required();
  overlay->add_option("--pred", ov_pred)->required();
  overlay->add_option("output", ov_out)->required();

  std::vector<std::string> report_runs;
  std::vector<double> report_minutes;
  std::string report_format = "text";
  fs::path report_out;
  auto* report = app.add_subcommand("report", "comparison table from metrics reports");
  report->add_option("--run", report_runs, "LABEL=REPORT.json, repeatable")->required();
  report->add_option("--minutes", report_minutes, "wall-clock minutes per run, repeatable");
  report->add_option("--format", report_format, "text|csv|json")->capture_default_str();
  report->add_option("--out", report_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 2;
  }
  if (jobs == 0) jobs = 1;

  try {
    if (*edges) return cmd_edges(edge_opt, edges_in, edges_out);
    if (*compose) return cmd_compose(compose_edge_opt, compose_args, jobs);
    if (*tile_cmd) return cmd_tile(tile_args, jobs);
    if (*weights) return cmd_weights(weights_in, weights_out, weights_split);
    if (*split) return cmd_split(split_in, split_out, split_fraction, split_seed, split_per_tile);
    if (*crops) return cmd_crops(crop_args, jobs);
    if (*gen) return cmd_gen(gen_args);
    if (*merge) return cmd_merge(merge_in, merge_batch, merge_out);
    if (*evaluate) return cmd_evaluate(eval_args, jobs);
    if (*overlay) return cmd_overlay(ov_photo, ov_gt, ov_pred, ov_out);
    if (*report) return cmd_report(report_runs, report_minutes, report_format, report_out);
  } catch (const IoError& e) {
    std::cerr << "damseg: I/O error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "damseg: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "damseg: I/O error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
