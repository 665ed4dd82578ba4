// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace puzzlesim {

// Process-wide cap on worker threads; 0 restores the hardware default.
void set_max_threads(int threads);
int max_threads();

// Runs body(i) for i in [0, count). Work is split into contiguous static
// chunks, so every index is always handled the same way regardless of the
// thread count; bodies must only write state owned by their index.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace puzzlesim
