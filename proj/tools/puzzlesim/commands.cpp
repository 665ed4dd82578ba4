// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <regex>

#include "json.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/eval.hpp"
#include "puzzlesim/image_io.hpp"
#include "puzzlesim/inpaint.hpp"
#include "puzzlesim/inpainter.hpp"
#include "puzzlesim/parallel.hpp"
#include "puzzlesim/puzzle_similarity.hpp"

namespace puzzlesim::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

void emit(const RunConfig& config, const json& summary, const std::string& text) {
  if (config.json) {
    std::cout << summary.dump() << '\n';
  } else {
    std::cout << text;
  }
}

fs::path parent_or_dot(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

fs::path with_suffix(const fs::path& prefix, const std::string& suffix) {
  return prefix.parent_path() / (prefix.filename().string() + suffix);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw IoError("cannot write " + path.string());
}

bool is_image_path(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

ImageTensor resize_image(const ImageTensor& img, int h, int w) {
  Tensor t = bilinear_resize(img.planar(), h, w);
  return ImageTensor(std::move(t));
}

// ---------------------------------------------------------------------------

struct IndexArgs {
  std::string refs_dir;
  std::string out;
  std::string ref_size;
};

int run_index(const CLI::App& app, const RunConfig& config, const IndexArgs& args) {
  std::vector<fs::path> files;
  if (!fs::is_directory(args.refs_dir)) throw IoError(args.refs_dir + " is not a directory");
  for (const auto& e : fs::directory_iterator(args.refs_dir)) {
    if (e.is_regular_file() && is_image_path(e.path())) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    std::cerr << "error: no reference images in " << args.refs_dir << '\n';
    return kInputError;
  }

  int ref_h = 0, ref_w = 0;
  if (!args.ref_size.empty()) {
    std::smatch m;
    static const std::regex pattern(R"(^(\d+)x(\d+)$)");
    if (!std::regex_match(args.ref_size, m, pattern) || std::stoi(m[1]) < 1 || std::stoi(m[2]) < 1) {
      throw ArgumentError("--ref-size expects HxW, got '" + args.ref_size + "'");
    }
    ref_h = std::stoi(m[1]);
    ref_w = std::stoi(m[2]);
  }

  std::vector<ImageTensor> refs;
  std::vector<std::string> names;
  std::vector<std::string> unreadable;
  for (const fs::path& f : files) {
    try {
      ImageTensor img = load_image(f);
      refs.push_back(ref_h > 0 ? resize_image(img, ref_h, ref_w) : std::move(img));
      names.push_back(f.filename().string());
    } catch (const Error& e) {
      unreadable.push_back(f.string() + ": " + e.what());
    }
  }
  if (!unreadable.empty()) {
    std::cerr << "error: unreadable reference images:\n";
    for (const auto& u : unreadable) std::cerr << "  " << u << '\n';
    return kInputError;
  }

  const Backbone backbone = load_backbone(config);
  const ReferenceIndex index = build_index(refs, backbone, names);
  const fs::path out(args.out);
  fs::create_directories(parent_or_dot(out));
  save_index(index, out);
  echo_config(app, parent_or_dot(out), "index");

  json summary = {{"command", "index"}, {"index", out.string()}, {"network", index.spec_name},
                  {"references", names}};
  summary["taps"] = json::array();
  std::string text = "wrote " + out.string() + " (" + std::to_string(names.size()) + " references)\n";
  for (const IndexTap& t : index.taps) {
    summary["taps"].push_back({{"name", t.name}, {"rows", t.row_count()}, {"channels", t.channels()},
                               {"degenerate_excluded", t.degenerate_excluded}});
    text += "  " + t.name + ": " + std::to_string(t.row_count()) + " rows x " + std::to_string(t.channels()) +
            " channels\n";
  }
  emit(config, summary, text);
  return kOk;
}

// ---------------------------------------------------------------------------

struct MapArgs {
  std::string test_image;
  std::string index;
  std::string out_prefix;
  bool per_layer = false;
  std::string colormap = "viridis";
};

int run_map(const CLI::App& app, const RunConfig& config, const MapArgs& args) {
  const Colormap cmap = parse_colormap(args.colormap);
  const ReferenceIndex index = load_index(args.index);
  const ImageTensor test = load_image(args.test_image);
  const Backbone backbone = load_backbone(config);
  const SimilarityMap map = puzzle_similarity(test, index, backbone, similarity_options(config));

  const fs::path prefix(args.out_prefix);
  fs::create_directories(parent_or_dot(prefix));
  const fs::path heatmap = with_suffix(prefix, ".png");
  save_heatmap(map.values, heatmap, cmap);
  echo_config(app, parent_or_dot(prefix), "map");

  json summary = {{"command", "map"},
                  {"heatmap", heatmap.string()},
                  {"sidecar", sidecar_path(heatmap).string()},
                  {"height", map.values.dim(0)},
                  {"width", map.values.dim(1)},
                  {"min", min_value(map.values)},
                  {"max", max_value(map.values)},
                  {"mean", mean_value(map.values)}};
  summary["layers"] = json::array();
  char line[160];
  std::snprintf(line, sizeof line, "wrote %s  min %.6f  mean %.6f  max %.6f\n", heatmap.string().c_str(),
                min_value(map.values), mean_value(map.values), max_value(map.values));
  std::string text = line;
  for (const SimilarityLayer& layer : map.layers) {
    json lj = {{"name", layer.name},
               {"weight", layer.weight},
               {"height", layer.values.dim(0)},
               {"width", layer.values.dim(1)},
               {"mean", mean_value(layer.values)},
               {"degenerate", static_cast<std::size_t>(mean_value(layer.degenerate) * layer.degenerate.size() + 0.5)}};
    if (args.per_layer) {
      const fs::path p = with_suffix(prefix, "." + layer.name + ".png");
      save_heatmap(layer.values, p, cmap);
      lj["heatmap"] = p.string();
      lj["sidecar"] = sidecar_path(p).string();
      text += "  " + p.string() + " (" + std::to_string(layer.values.dim(0)) + "x" +
              std::to_string(layer.values.dim(1)) + ")\n";
    }
    summary["layers"].push_back(lj);
  }
  emit(config, summary, text);
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string maps_dir;
  std::string annotations;
  std::string out_csv;
  std::string fit_scope = "sample";
};

int run_eval(const CLI::App& app, const RunConfig& config, const EvalArgs& args) {
  EvalOptions options;
  options.scope = parse_fit_scope(args.fit_scope);
  options.fit.seed = config.seed;
  const fs::path maps_dir(args.maps_dir);
  if (!fs::is_directory(maps_dir)) throw IoError("map directory " + args.maps_dir + " does not exist");
  const auto annotations = ingest_annotations(args.annotations);
  if (annotations.empty()) {
    std::cerr << "error: no annotations under " << args.annotations << '\n';
    return kInputError;
  }
  const MapLookup lookup = [&](const std::string& scene, const std::string& sample) -> std::optional<Tensor> {
    const fs::path p = maps_dir / scene / (sample + ".pzsm");
    if (!fs::is_regular_file(p)) return std::nullopt;
    return read_sidecar(p);
  };
  const CorrelationReport report = evaluate(annotations, lookup, options);

  const fs::path csv(args.out_csv);
  fs::create_directories(parent_or_dot(csv));
  write_text(csv, report_csv(report));
  fs::path table_path = csv;
  table_path.replace_extension(".txt");
  const std::string table = report_table(report);
  write_text(table_path, table);
  echo_config(app, parent_or_dot(csv), "eval");

  for (const std::string& m : report.missing) std::cerr << "missing map: " << m << '\n';
  for (const std::string& s : report.excluded_scenes) std::cerr << "excluded scene: " << s << '\n';

  json summary = {{"command", "eval"},
                  {"csv", csv.string()},
                  {"table", table_path.string()},
                  {"samples", report.samples.size()},
                  {"scenes", report.scenes.size()},
                  {"pcc_mean", report.pcc_mean},
                  {"pcc_std", report.pcc_std},
                  {"srcc_mean", report.srcc_mean},
                  {"srcc_std", report.srcc_std},
                  {"missing", report.missing},
                  {"excluded_scenes", report.excluded_scenes}};
  emit(config, summary, table);
  return report.complete() ? kOk : kPartial;
}

// ---------------------------------------------------------------------------

struct InpaintArgs {
  std::string test_image;
  std::string index;
  std::string backend;
  std::string out_prefix;
};

const char* status_name(InpaintStatus s) {
  switch (s) {
    case InpaintStatus::kConverged: return "converged";
    case InpaintStatus::kRoundLimit: return "round-limit";
    case InpaintStatus::kBackendError: return "backend-error";
  }
  return "?";
}

int run_inpaint(const CLI::App& app, const RunConfig& config, const InpaintArgs& args) {
  auto inpainter = make_inpainter(args.backend, std::chrono::seconds(config.backend_timeout_s));
  const ReferenceIndex index = load_index(args.index);
  const ImageTensor test = load_image(args.test_image);
  const Backbone backbone = load_backbone(config);

  InpaintConfig ic;
  ic.n_candidates = config.candidates;
  ic.alpha = config.alpha;
  ic.lambda = config.lambda;
  ic.max_rounds = config.rounds;
  ic.max_in_flight = config.in_flight;
  ic.similarity = similarity_options(config);
  const InpaintResult result = inpaint_iteratively(test, index, backbone, *inpainter, ic);

  const fs::path prefix(args.out_prefix);
  fs::create_directories(parent_or_dot(prefix));
  const fs::path image_path = with_suffix(prefix, ".png");
  const fs::path trace_path = with_suffix(prefix, ".trace.jsonl");
  save_png(result.image, image_path);
  write_text(trace_path, trace_jsonl(result.trace));
  echo_config(app, parent_or_dot(prefix), "inpaint");

  const double final_mean = result.trace.empty() ? result.initial_mean_sim : result.trace.back().mean_sim;
  json summary = {{"command", "inpaint"},
                  {"backend", inpainter->identity()},
                  {"status", status_name(result.status)},
                  {"rounds", result.trace.size()},
                  {"accepted", result.accepted_rounds},
                  {"initial_mean_sim", result.initial_mean_sim},
                  {"final_mean_sim", final_mean},
                  {"image", image_path.string()},
                  {"trace", trace_path.string()}};
  if (result.status == InpaintStatus::kBackendError) summary["error"] = result.error;
  char line[200];
  std::snprintf(line, sizeof line, "%s after %zu round(s), %d accepted; mean similarity %.6f -> %.6f\n",
                status_name(result.status), result.trace.size(), result.accepted_rounds, result.initial_mean_sim,
                final_mean);
  emit(config, summary, line);
  if (result.status == InpaintStatus::kBackendError) {
    std::cerr << "error: inpainting backend failed: " << result.error << '\n';
    return kBackendError;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int run_export_spec(const std::string& name, const std::string& out) {
  std::string text;
  if (name.empty()) {
    std::string all = "[\n";
    const auto names = builtin_spec_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
      all += spec_to_json(builtin_spec(names[i]));
      all += i + 1 < names.size() ? ",\n" : "\n";
    }
    text = all + "]\n";
  } else {
    text = spec_to_json(builtin_spec(name)) + "\n";
  }
  if (out.empty()) {
    std::cout << text;
  } else {
    write_text(out, text);
  }
  return kOk;
}

}  // namespace

std::vector<Command> add_commands(CLI::App& app, const RunConfig& config) {
  std::vector<Command> commands;

  {
    auto args = std::make_shared<IndexArgs>();
    CLI::App* sub = app.add_subcommand("index", "Build a reference index from a directory of images");
    sub->add_option("refs-dir", args->refs_dir, "Directory of reference PNG/JPEG images")->required();
    sub->add_option("out", args->out, "Output index file (PZIX)")->required();
    sub->add_option("--ref-size", args->ref_size, "Resize every reference to HxW before embedding (default: native)");
    commands.push_back({sub, [&app, &config, args] { return run_index(app, config, *args); }});
  }
  {
    auto args = std::make_shared<MapArgs>();
    CLI::App* sub = app.add_subcommand("map", "Compute the similarity map of a test image");
    sub->add_option("test-image", args->test_image, "Test image")->required();
    sub->add_option("index", args->index, "Reference index (PZIX)")->required();
    sub->add_option("out-prefix", args->out_prefix, "Writes <prefix>.png and <prefix>.pzsm")->required();
    sub->add_flag("--per-layer", args->per_layer, "Also write <prefix>.<tap>.png/.pzsm at each tap's resolution");
    sub->add_option("--colormap", args->colormap, "viridis, turbo or gray")
        ->check(CLI::IsMember({"viridis", "turbo", "gray"}))
        ->capture_default_str();
    commands.push_back({sub, [&app, &config, args] { return run_map(app, config, *args); }});
  }
  {
    auto args = std::make_shared<EvalArgs>();
    CLI::App* sub = app.add_subcommand("eval", "Correlate similarity maps with human artifact annotations");
    sub->add_option("maps-dir", args->maps_dir, "Maps as <maps-dir>/<scene>/<sample>.pzsm")->required();
    sub->add_option("annotations", args->annotations, "Masks as <root>/<scene>/<sample>/<participant>.png")
        ->required();
    sub->add_option("out-csv", args->out_csv, "Per-sample CSV; the table goes next to it as .txt")->required();
    sub->add_option("--fit-scope", args->fit_scope, "Logistic fit per sample, scene or globally")
        ->check(CLI::IsMember({"sample", "scene", "global"}))
        ->capture_default_str();
    commands.push_back({sub, [&app, &config, args] { return run_eval(app, config, *args); }});
  }
  {
    auto args = std::make_shared<InpaintArgs>();
    CLI::App* sub = app.add_subcommand("inpaint", "Progressively inpaint low-similarity regions");
    sub->add_option("test-image", args->test_image, "Test image")->required();
    sub->add_option("index", args->index, "Reference index (PZIX)")->required();
    sub->add_option("backend", args->backend, "identity, mean-fill, http(s)://host:port[/path] or exec:<path>")
        ->required();
    sub->add_option("out-prefix", args->out_prefix, "Writes <prefix>.png and <prefix>.trace.jsonl")->required();
    commands.push_back({sub, [&app, &config, args] { return run_inpaint(app, config, *args); }});
  }
  {
    auto name = std::make_shared<std::string>();
    auto out = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand("export-spec", "Print built-in network specs as JSON");
    sub->add_option("name", *name, "squeezenet1_1, vgg16 or alexnet (default: all)");
    sub->add_option("--out", *out, "Write to a file instead of stdout");
    commands.push_back({sub, [name, out] { return run_export_spec(*name, *out); }});
  }
  return commands;
}

}  // namespace puzzlesim::cli
