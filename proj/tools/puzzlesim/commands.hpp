// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "CLI11.hpp"
#include "run_config.hpp"

namespace puzzlesim::cli {

enum ExitCode : int { kOk = 0, kPartial = 1, kInputError = 2, kBackendError = 3 };

struct Command {
  CLI::App* app = nullptr;
  std::function<int()> run;
};

// Registers index, map, eval, inpaint and export-spec on `app`. The returned
// runners read `config` when invoked, after parsing.
std::vector<Command> add_commands(CLI::App& app, const RunConfig& config);

}  // namespace puzzlesim::cli
