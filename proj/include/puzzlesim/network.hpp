// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "puzzlesim/archive.hpp"
#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

enum class LayerKind { kConv2d, kRelu, kMaxPool2d, kFire };

struct LayerDesc {
  LayerKind kind = LayerKind::kRelu;
  std::string name;

  // conv2d; for fire, in_channels is the module input width.
  int in_channels = 0;
  int out_channels = 0;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;

  // maxpool2d (kernel_h is the square window size)
  bool ceil_mode = false;

  // fire: squeeze 1x1 -> ReLU -> {expand 1x1, expand 3x3 pad 1} -> ReLU -> concat
  int squeeze = 0;
  int expand1x1 = 0;
  int expand3x3 = 0;

  // conv2d: {weight, bias}
  // fire:   {squeeze.w, squeeze.b, expand1x1.w, expand1x1.b, expand3x3.w, expand3x3.b}
  std::vector<std::string> weight_keys;

  int output_channels() const;
};

enum class TapActivation { kPost, kPre };

struct TapDesc {
  int layer = 0;
  std::string name;
  double weight = 0.0;
  // kPre captures a fire module's concatenated expand outputs before their
  // ReLU, or a relu layer's input. Other layers only support kPost.
  TapActivation activation = TapActivation::kPost;
};

struct NetworkSpec {
  std::string name;
  int input_channels = 3;
  // When unset, preprocessing comes from the archive metadata.
  std::optional<Preprocess> preprocess;
  std::vector<LayerDesc> layers;
  std::vector<TapDesc> taps;

  // Throws ValidationError on broken tap references, weights that do not sum
  // to one, or inconsistent channel counts along the chain.
  void validate() const;

  // Replaces tap weights (renormalized to sum to one).
  NetworkSpec with_tap_weights(const std::vector<double>& weights) const;
};

std::vector<std::string> builtin_spec_names();
// "squeezenet1_1" (alias "squeezenet"), "vgg16", "alexnet".
NetworkSpec builtin_spec(const std::string& name);

std::string spec_to_json(const NetworkSpec& spec);
NetworkSpec spec_from_json(const std::string& text);
NetworkSpec load_spec_file(const std::filesystem::path& path);

struct FeatureMap {
  std::string name;
  Tensor features;  // [C, H, W]
};

struct FeatureStack {
  std::vector<FeatureMap> taps;
};

// A spec bound to an archive whose weights have been checked against it.
class Backbone {
 public:
  Backbone(NetworkSpec spec, TensorArchive archive);

  const NetworkSpec& spec() const { return spec_; }
  const TensorArchive& archive() const { return *archive_; }
  const Preprocess& preprocess() const { return preprocess_; }

  // Smallest input height/width for which every layer up to the last tap
  // produces a non-empty map.
  int min_input_height() const { return min_h_; }
  int min_input_width() const { return min_w_; }

  // Spatial size of every tap for a given input size.
  std::vector<std::pair<int, int>> tap_sizes(int height, int width) const;

  FeatureStack forward(const ImageTensor& image) const;

 private:
  NetworkSpec spec_;
  std::shared_ptr<const TensorArchive> archive_;
  Preprocess preprocess_;
  int last_layer_ = 0;
  int min_h_ = 1;
  int min_w_ = 1;
};

// Convenience wrapper: Backbone(spec, archive).forward(image).
FeatureStack forward(const NetworkSpec& spec, const TensorArchive& archive, const ImageTensor& image);

}  // namespace puzzlesim
