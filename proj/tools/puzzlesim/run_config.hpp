// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "puzzlesim/network.hpp"
#include "puzzlesim/puzzle_similarity.hpp"

namespace puzzlesim::cli {

// Settings shared by every subcommand. Values come from flags, then the
// --config file, then the defaults below.
struct RunConfig {
  std::string archive;
  std::string spec_name;  // empty: use the archive's spec.name
  std::string spec_file;
  std::vector<double> tap_weights;
  std::size_t tile_query = 256;
  std::size_t tile_ref = 4096;
  std::size_t memory_budget_mib = 512;
  double lambda = 0.05;
  double alpha = 0.05;
  int candidates = 50;
  int rounds = 10;
  int in_flight = 2;
  int backend_timeout_s = 300;
  std::uint64_t seed = 0;
  int threads = 0;
  bool json = false;
};

void add_global_options(CLI::App& app, RunConfig& config);

// Loads the archive and resolves the network spec, applying tap weight
// overrides (renormalized).
Backbone load_backbone(const RunConfig& config);

SimilarityOptions similarity_options(const RunConfig& config);

// Writes the fully resolved configuration as <dir>/puzzlesim-<command>.toml.
void echo_config(const CLI::App& app, const std::filesystem::path& dir, const std::string& command);

}  // namespace puzzlesim::cli
