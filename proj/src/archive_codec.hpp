// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

// Shared entry/metadata encoding used by both PZTA and PZIX containers.

#pragma once

#include <map>
#include <string>

#include "binary_io.hpp"
#include "puzzlesim/tensor.hpp"

namespace puzzlesim::detail {

void write_entries(ByteWriter& out, const std::map<std::string, Tensor>& entries);
void write_metadata(ByteWriter& out, const std::map<std::string, std::string>& metadata);
std::map<std::string, Tensor> read_entries(ByteReader& in);
std::map<std::string, std::string> read_metadata(ByteReader& in);

}  // namespace puzzlesim::detail
