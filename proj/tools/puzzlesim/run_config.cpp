// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "run_config.hpp"

#include <fstream>

#include "puzzlesim/archive.hpp"
#include "puzzlesim/errors.hpp"

namespace puzzlesim::cli {

void add_global_options(CLI::App& app, RunConfig& c) {
  app.set_config("--config", "", "TOML-style key = value file; command-line flags take precedence");
  app.add_option("--archive", c.archive, "Backbone weights (PZTA)")->check(CLI::ExistingFile);
  auto* spec = app.add_option("--spec", c.spec_name, "Built-in network name (default: the archive's spec.name)");
  app.add_option("--spec-file", c.spec_file, "Network spec as JSON")->check(CLI::ExistingFile)->excludes(spec);
  app.add_option("--tap-weights", c.tap_weights, "Per-tap fusion weights, renormalized to sum to 1")
      ->delimiter(',')
      ->check(CLI::NonNegativeNumber);
  app.add_option("--tile-q", c.tile_query, "Query rows per tile")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--tile-r", c.tile_ref, "Reference rows per tile")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--memory-budget", c.memory_budget_mib, "Matching working-set budget in MiB")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--lambda", c.lambda, "Mask-area penalty of the inpainting score")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--alpha", c.alpha, "Half-width of the refined threshold window, as a fraction of the map range")
      ->check(CLI::Range(1e-9, 1.0))
      ->capture_default_str();
  app.add_option("--candidates", c.candidates, "Threshold candidates per round")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--rounds", c.rounds, "Inpainting round limit")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--in-flight", c.in_flight, "Concurrent inpainting requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--backend-timeout", c.backend_timeout_s, "HTTP backend timeout in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--seed", c.seed, "Seed for every randomized step")->capture_default_str();
  app.add_option("--threads", c.threads, "Worker thread cap (0: all cores)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_flag("--json", c.json, "Print a JSON summary on stdout");
}

Backbone load_backbone(const RunConfig& c) {
  if (c.archive.empty()) throw ArgumentError("--archive is required");
  TensorArchive archive = load_archive(c.archive);
  NetworkSpec spec = !c.spec_file.empty() ? load_spec_file(c.spec_file)
                                          : builtin_spec(c.spec_name.empty() ? archive.spec_name() : c.spec_name);
  if (!c.tap_weights.empty()) spec = spec.with_tap_weights(c.tap_weights);
  return Backbone(std::move(spec), std::move(archive));
}

SimilarityOptions similarity_options(const RunConfig& c) {
  SimilarityOptions o;
  o.tiles = {c.tile_query, c.tile_ref};
  o.memory_budget_bytes = c.memory_budget_mib << 20;
  return o;
}

void echo_config(const CLI::App& app, const std::filesystem::path& dir, const std::string& command) {
  std::filesystem::create_directories(dir.empty() ? "." : dir);
  const std::filesystem::path path = (dir.empty() ? std::filesystem::path(".") : dir) / ("puzzlesim-" + command + ".toml");
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << app.config_to_str(true, false);
}

}  // namespace puzzlesim::cli
