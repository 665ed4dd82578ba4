// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/network.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "puzzlesim/errors.hpp"
#include "puzzlesim/layers.hpp"

namespace puzzlesim {

using nlohmann::json;

int LayerDesc::output_channels() const {
  switch (kind) {
    case LayerKind::kConv2d: return out_channels;
    case LayerKind::kFire: return expand1x1 + expand3x3;
    default: return in_channels;
  }
}

namespace {

LayerDesc conv(std::string name, int in, int out, int k, int stride, int pad, const std::string& key) {
  LayerDesc d;
  d.kind = LayerKind::kConv2d;
  d.name = std::move(name);
  d.in_channels = in;
  d.out_channels = out;
  d.kernel_h = d.kernel_w = k;
  d.stride = stride;
  d.padding = pad;
  d.weight_keys = {key + ".weight", key + ".bias"};
  return d;
}

LayerDesc relu_layer(std::string name) {
  LayerDesc d;
  d.kind = LayerKind::kRelu;
  d.name = std::move(name);
  return d;
}

LayerDesc pool(std::string name, int k, int stride, bool ceil_mode) {
  LayerDesc d;
  d.kind = LayerKind::kMaxPool2d;
  d.name = std::move(name);
  d.kernel_h = d.kernel_w = k;
  d.stride = stride;
  d.ceil_mode = ceil_mode;
  return d;
}

LayerDesc fire(std::string name, int in, int squeeze, int e1, int e3, const std::string& key) {
  LayerDesc d;
  d.kind = LayerKind::kFire;
  d.name = std::move(name);
  d.in_channels = in;
  d.squeeze = squeeze;
  d.expand1x1 = e1;
  d.expand3x3 = e3;
  d.weight_keys = {key + ".squeeze.weight",   key + ".squeeze.bias",   key + ".expand1x1.weight",
                   key + ".expand1x1.bias",   key + ".expand3x3.weight", key + ".expand3x3.bias"};
  return d;
}

// Layer indices mirror torchvision's `features` Sequential so that weight keys
// read "features.<index>.*".
NetworkSpec squeezenet1_1() {
  NetworkSpec s;
  s.name = "squeezenet1_1";
  s.layers = {
      conv("conv1", 3, 64, 3, 2, 0, "features.0"),
      relu_layer("relu1"),
      pool("pool1", 3, 2, true),
      fire("fire2", 64, 16, 64, 64, "features.3"),
      fire("fire3", 128, 16, 64, 64, "features.4"),
      pool("pool3", 3, 2, true),
      fire("fire4", 128, 32, 128, 128, "features.6"),
      fire("fire5", 256, 32, 128, 128, "features.7"),
      pool("pool5", 3, 2, true),
      fire("fire6", 256, 48, 192, 192, "features.9"),
      fire("fire7", 384, 48, 192, 192, "features.10"),
      fire("fire8", 384, 64, 256, 256, "features.11"),
      fire("fire9", 512, 64, 256, 256, "features.12"),
  };
  s.taps = {{4, "fire3", 0.67}, {7, "fire5", 0.2}, {9, "fire6", 0.13}};
  return s;
}

NetworkSpec vgg16() {
  NetworkSpec s;
  s.name = "vgg16";
  const int widths[5] = {64, 128, 256, 512, 512};
  const int convs[5] = {2, 2, 3, 3, 3};
  int in = 3;
  int index = 0;
  for (int stage = 0; stage < 5; ++stage) {
    for (int k = 0; k < convs[stage]; ++k) {
      const std::string suffix = std::to_string(stage + 1) + "_" + std::to_string(k + 1);
      s.layers.push_back(conv("conv" + suffix, in, widths[stage], 3, 1, 1, "features." + std::to_string(index++)));
      s.layers.push_back(relu_layer("relu" + suffix));
      ++index;
      in = widths[stage];
    }
    s.layers.push_back(pool("pool" + std::to_string(stage + 1), 2, 2, false));
    ++index;
  }
  s.taps = {{8, "relu2_2", 0.67}, {15, "relu3_3", 0.2}, {22, "relu4_3", 0.13}};
  return s;
}

NetworkSpec alexnet() {
  NetworkSpec s;
  s.name = "alexnet";
  s.layers = {
      conv("conv1", 3, 64, 11, 4, 2, "features.0"),    relu_layer("relu1"), pool("pool1", 3, 2, false),
      conv("conv2", 64, 192, 5, 1, 2, "features.3"),   relu_layer("relu2"), pool("pool2", 3, 2, false),
      conv("conv3", 192, 384, 3, 1, 1, "features.6"),  relu_layer("relu3"),
      conv("conv4", 384, 256, 3, 1, 1, "features.8"),  relu_layer("relu4"),
      conv("conv5", 256, 256, 3, 1, 1, "features.10"), relu_layer("relu5"), pool("pool5", 3, 2, false),
  };
  s.taps = {{4, "relu2", 0.67}, {7, "relu3", 0.2}, {9, "relu4", 0.13}};
  return s;
}

std::string kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::kConv2d: return "conv2d";
    case LayerKind::kRelu: return "relu";
    case LayerKind::kMaxPool2d: return "maxpool2d";
    case LayerKind::kFire: return "concat-fire";
  }
  return "?";
}

LayerKind parse_kind(const std::string& s) {
  if (s == "conv2d") return LayerKind::kConv2d;
  if (s == "relu") return LayerKind::kRelu;
  if (s == "maxpool2d") return LayerKind::kMaxPool2d;
  if (s == "concat-fire") return LayerKind::kFire;
  throw ValidationError("unknown layer kind '" + s + "'");
}

// Per-axis size after running layers [0, last]; 0 when some layer empties.
int propagate_axis(const std::vector<LayerDesc>& layers, int last, int size, bool height) {
  for (int i = 0; i <= last && size > 0; ++i) {
    const LayerDesc& l = layers[static_cast<std::size_t>(i)];
    const int k = height ? l.kernel_h : l.kernel_w;
    switch (l.kind) {
      case LayerKind::kConv2d: size = conv_output_size(size, k, l.stride, l.padding); break;
      case LayerKind::kMaxPool2d: size = pool_output_size(size, k, l.stride, l.padding, l.ceil_mode); break;
      default: break;
    }
  }
  return size;
}

int min_axis(const std::vector<LayerDesc>& layers, int last, bool height) {
  for (int n = 1; n <= 1 << 16; ++n) {
    if (propagate_axis(layers, last, n, height) > 0) return n;
  }
  throw ValidationError("network never produces a non-empty output");
}

}  // namespace

std::vector<std::string> builtin_spec_names() { return {"squeezenet1_1", "vgg16", "alexnet"}; }

NetworkSpec builtin_spec(const std::string& name) {
  if (name == "squeezenet1_1" || name == "squeezenet") return squeezenet1_1();
  if (name == "vgg16") return vgg16();
  if (name == "alexnet") return alexnet();
  throw ArgumentError("unknown built-in network '" + name + "'");
}

void NetworkSpec::validate() const {
  if (name.empty()) throw ValidationError("network spec has no name");
  if (layers.empty()) throw ValidationError("network spec '" + name + "' has no layers");
  if (taps.empty()) throw ValidationError("network spec '" + name + "' has no taps");
  int channels = input_channels;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const LayerDesc& l = layers[i];
    const std::string where = "layer " + std::to_string(i) + " (" + l.name + ")";
    switch (l.kind) {
      case LayerKind::kConv2d:
        if (l.in_channels != channels) throw ValidationError(where + ": expects " + std::to_string(l.in_channels) +
                                                             " input channels, chain provides " + std::to_string(channels));
        if (l.out_channels < 1 || l.kernel_h < 1 || l.kernel_w < 1 || l.stride < 1 || l.padding < 0) {
          throw ValidationError(where + ": invalid conv parameters");
        }
        if (l.weight_keys.size() != 2) throw ValidationError(where + ": conv2d needs 2 weight keys");
        break;
      case LayerKind::kFire:
        if (l.in_channels != channels) throw ValidationError(where + ": fire input width mismatch");
        if (l.squeeze < 1 || l.expand1x1 < 1 || l.expand3x3 < 1) throw ValidationError(where + ": invalid fire widths");
        if (l.weight_keys.size() != 6) throw ValidationError(where + ": fire needs 6 weight keys");
        break;
      case LayerKind::kMaxPool2d:
        if (l.kernel_h < 1 || l.stride < 1 || l.padding < 0 || 2 * l.padding > l.kernel_h) {
          throw ValidationError(where + ": invalid pool parameters");
        }
        break;
      case LayerKind::kRelu: break;
    }
    channels = l.kind == LayerKind::kConv2d || l.kind == LayerKind::kFire ? l.output_channels() : channels;
  }
  double sum = 0.0;
  int previous = -1;
  for (const TapDesc& t : taps) {
    if (t.layer < 0 || t.layer >= static_cast<int>(layers.size())) {
      throw ValidationError("tap '" + t.name + "' refers to missing layer " + std::to_string(t.layer));
    }
    if (t.layer < previous) throw ValidationError("taps must be ordered by layer index");
    previous = t.layer;
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) throw ValidationError("tap weights must be finite and >= 0");
    const LayerKind k = layers[static_cast<std::size_t>(t.layer)].kind;
    if (t.activation == TapActivation::kPre && k != LayerKind::kFire && k != LayerKind::kRelu) {
      throw ValidationError("tap '" + t.name + "': pre-activation capture needs a fire or relu layer");
    }
    sum += t.weight;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw ValidationError("tap weights of '" + name + "' sum to " + std::to_string(sum) + ", expected 1");
  }
}

NetworkSpec NetworkSpec::with_tap_weights(const std::vector<double>& weights) const {
  if (weights.size() != taps.size()) {
    throw ArgumentError("expected " + std::to_string(taps.size()) + " tap weights, got " + std::to_string(weights.size()));
  }
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(sum > 0.0)) throw ArgumentError("tap weights must have a positive sum");
  NetworkSpec out = *this;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw ArgumentError("tap weights must be >= 0");
    out.taps[i].weight = weights[i] / sum;
  }
  return out;
}

std::string spec_to_json(const NetworkSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["input_channels"] = spec.input_channels;
  if (spec.preprocess) {
    j["preprocess"] = {{"mean", spec.preprocess->mean}, {"std", spec.preprocess->std}};
  }
  j["layers"] = json::array();
  for (const LayerDesc& l : spec.layers) {
    json lj = {{"kind", kind_name(l.kind)}, {"name", l.name}};
    switch (l.kind) {
      case LayerKind::kConv2d:
        lj["in_channels"] = l.in_channels;
        lj["out_channels"] = l.out_channels;
        lj["kernel"] = {l.kernel_h, l.kernel_w};
        lj["stride"] = l.stride;
        lj["padding"] = l.padding;
        lj["weights"] = l.weight_keys;
        break;
      case LayerKind::kMaxPool2d:
        lj["kernel"] = l.kernel_h;
        lj["stride"] = l.stride;
        lj["padding"] = l.padding;
        lj["ceil_mode"] = l.ceil_mode;
        break;
      case LayerKind::kFire:
        lj["in_channels"] = l.in_channels;
        lj["squeeze"] = l.squeeze;
        lj["expand1x1"] = l.expand1x1;
        lj["expand3x3"] = l.expand3x3;
        lj["weights"] = l.weight_keys;
        break;
      case LayerKind::kRelu: break;
    }
    j["layers"].push_back(lj);
  }
  j["taps"] = json::array();
  for (const TapDesc& t : spec.taps) {
    j["taps"].push_back({{"layer", t.layer},
                         {"name", t.name},
                         {"weight", t.weight},
                         {"activation", t.activation == TapActivation::kPre ? "pre" : "post"}});
  }
  return j.dump(2);
}

NetworkSpec spec_from_json(const std::string& text) {
  NetworkSpec spec;
  try {
    const json j = json::parse(text);
    spec.name = j.at("name").get<std::string>();
    spec.input_channels = j.value("input_channels", 3);
    if (j.contains("preprocess")) {
      Preprocess p;
      p.mean = j["preprocess"].at("mean").get<std::array<float, 3>>();
      p.std = j["preprocess"].at("std").get<std::array<float, 3>>();
      spec.preprocess = p;
    }
    for (const json& lj : j.at("layers")) {
      LayerDesc l;
      l.kind = parse_kind(lj.at("kind").get<std::string>());
      l.name = lj.value("name", std::string{});
      switch (l.kind) {
        case LayerKind::kConv2d: {
          l.in_channels = lj.at("in_channels").get<int>();
          l.out_channels = lj.at("out_channels").get<int>();
          const json& k = lj.at("kernel");
          l.kernel_h = k.is_array() ? k.at(0).get<int>() : k.get<int>();
          l.kernel_w = k.is_array() ? k.at(1).get<int>() : k.get<int>();
          l.stride = lj.value("stride", 1);
          l.padding = lj.value("padding", 0);
          l.weight_keys = lj.at("weights").get<std::vector<std::string>>();
          break;
        }
        case LayerKind::kMaxPool2d:
          l.kernel_h = l.kernel_w = lj.at("kernel").get<int>();
          l.stride = lj.value("stride", l.kernel_h);
          l.padding = lj.value("padding", 0);
          l.ceil_mode = lj.value("ceil_mode", false);
          break;
        case LayerKind::kFire:
          l.in_channels = lj.at("in_channels").get<int>();
          l.squeeze = lj.at("squeeze").get<int>();
          l.expand1x1 = lj.at("expand1x1").get<int>();
          l.expand3x3 = lj.at("expand3x3").get<int>();
          l.weight_keys = lj.at("weights").get<std::vector<std::string>>();
          break;
        case LayerKind::kRelu: break;
      }
      spec.layers.push_back(std::move(l));
    }
    for (const json& tj : j.at("taps")) {
      TapDesc t;
      t.layer = tj.at("layer").get<int>();
      t.name = tj.at("name").get<std::string>();
      t.weight = tj.at("weight").get<double>();
      const std::string act = tj.value("activation", std::string("post"));
      if (act != "post" && act != "pre") throw ValidationError("tap activation must be 'pre' or 'post'");
      t.activation = act == "pre" ? TapActivation::kPre : TapActivation::kPost;
      spec.taps.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed network spec: ") + e.what());
  }
  spec.validate();
  return spec;
}

NetworkSpec load_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

// ---------------------------------------------------------------------------

namespace {

void expect_shape(const TensorArchive& archive, const std::string& key, const std::vector<int>& shape) {
  const Tensor& t = archive.tensor(key);
  if (t.shape() != shape) {
    throw ValidationError("archive tensor '" + key + "' has shape " + shape_string(t.shape()) + ", spec expects " +
                          shape_string(shape));
  }
}

Tensor preprocess_image(const ImageTensor& image, const Preprocess& p) {
  Tensor t = image.planar();
  const std::size_t plane = static_cast<std::size_t>(image.height()) * image.width();
  for (std::size_t c = 0; c < 3; ++c) {
    const float mean = p.mean[c];
    const float inv = 1.0f / p.std[c];
    float* v = t.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) v[i] = (v[i] - mean) * inv;
  }
  return t;
}

}  // namespace

Backbone::Backbone(NetworkSpec spec, TensorArchive archive)
    : spec_(std::move(spec)), archive_(std::make_shared<const TensorArchive>(std::move(archive))) {
  spec_.validate();
  preprocess_ = spec_.preprocess ? *spec_.preprocess : archive_->preprocess();
  if (spec_.input_channels != 3) throw ValidationError("only 3-channel inputs are supported");
  last_layer_ = spec_.taps.back().layer;
  for (int i = 0; i <= last_layer_; ++i) {
    const LayerDesc& l = spec_.layers[static_cast<std::size_t>(i)];
    const auto& k = l.weight_keys;
    if (l.kind == LayerKind::kConv2d) {
      expect_shape(*archive_, k[0], {l.out_channels, l.in_channels, l.kernel_h, l.kernel_w});
      expect_shape(*archive_, k[1], {l.out_channels});
    } else if (l.kind == LayerKind::kFire) {
      expect_shape(*archive_, k[0], {l.squeeze, l.in_channels, 1, 1});
      expect_shape(*archive_, k[1], {l.squeeze});
      expect_shape(*archive_, k[2], {l.expand1x1, l.squeeze, 1, 1});
      expect_shape(*archive_, k[3], {l.expand1x1});
      expect_shape(*archive_, k[4], {l.expand3x3, l.squeeze, 3, 3});
      expect_shape(*archive_, k[5], {l.expand3x3});
    }
  }
  min_h_ = min_axis(spec_.layers, last_layer_, true);
  min_w_ = min_axis(spec_.layers, last_layer_, false);
}

std::vector<std::pair<int, int>> Backbone::tap_sizes(int height, int width) const {
  std::vector<std::pair<int, int>> sizes;
  for (const TapDesc& t : spec_.taps) {
    sizes.emplace_back(propagate_axis(spec_.layers, t.layer, height, true),
                       propagate_axis(spec_.layers, t.layer, width, false));
  }
  return sizes;
}

FeatureStack Backbone::forward(const ImageTensor& image) const {
  if (image.height() < min_h_ || image.width() < min_w_) {
    throw InputTooSmallError("input " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                                 " is smaller than the minimum " + std::to_string(min_h_) + "x" +
                                 std::to_string(min_w_) + " for network '" + spec_.name + "'",
                             min_h_, min_w_);
  }
  const TensorArchive& a = *archive_;
  Tensor x = preprocess_image(image, preprocess_);
  FeatureStack stack;
  std::size_t next_tap = 0;
  for (int i = 0; i <= last_layer_; ++i) {
    const LayerDesc& l = spec_.layers[static_cast<std::size_t>(i)];
    const auto& k = l.weight_keys;
    std::optional<Tensor> pre;
    const bool want_pre = next_tap < spec_.taps.size() && spec_.taps[next_tap].layer == i &&
                          spec_.taps[next_tap].activation == TapActivation::kPre;
    switch (l.kind) {
      case LayerKind::kConv2d:
        x = conv2d(x, a.tensor(k[0]), a.tensor(k[1]), l.stride, l.padding);
        break;
      case LayerKind::kRelu:
        if (want_pre) pre = x;
        x = relu(std::move(x));
        break;
      case LayerKind::kMaxPool2d:
        x = maxpool2d(x, l.kernel_h, l.stride, l.padding, l.ceil_mode);
        break;
      case LayerKind::kFire: {
        const Tensor s = relu(conv2d(x, a.tensor(k[0]), a.tensor(k[1]), 1, 0));
        Tensor cat = concat_channels(conv2d(s, a.tensor(k[2]), a.tensor(k[3]), 1, 0),
                                     conv2d(s, a.tensor(k[4]), a.tensor(k[5]), 1, 1));
        if (want_pre) pre = cat;
        x = relu(std::move(cat));
        break;
      }
    }
    while (next_tap < spec_.taps.size() && spec_.taps[next_tap].layer == i) {
      const TapDesc& t = spec_.taps[next_tap];
      stack.taps.push_back({t.name, t.activation == TapActivation::kPre ? *pre : x});
      ++next_tap;
    }
  }
  for (std::size_t t = 1; t < stack.taps.size(); ++t) {
    const Tensor& prev = stack.taps[t - 1].features;
    const Tensor& cur = stack.taps[t].features;
    if (cur.dim(1) > prev.dim(1) || cur.dim(2) > prev.dim(2)) {
      throw ValidationError("tap '" + stack.taps[t].name + "' is larger than the preceding tap");
    }
  }
  return stack;
}

FeatureStack forward(const NetworkSpec& spec, const TensorArchive& archive, const ImageTensor& image) {
  return Backbone(spec, archive).forward(image);
}

}  // namespace puzzlesim
