// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/parallel.hpp"
#include "run_config.hpp"

int main(int argc, char** argv) {
  using namespace puzzlesim;
  using namespace puzzlesim::cli;

  CLI::App app{"Cross-reference image similarity maps, evaluation and progressive inpainting", "puzzlesim"};
  app.require_subcommand(1);
  app.fallthrough();
  RunConfig config;
  add_global_options(app, config);
  const std::vector<Command> commands = add_commands(app, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  set_max_threads(config.threads);
  try {
    for (const Command& c : commands) {
      if (c.app->parsed()) return c.run();
    }
  } catch (const BackendError& e) {
    std::cerr << "error: inpainting backend " << e.backend() << ": " << e.what() << '\n';
    return kBackendError;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kBackendError + 1;
  }
  return kInputError;
}
