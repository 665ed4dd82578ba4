// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/network.hpp"

namespace puzzlesim {
namespace {

Tensor relu_of(Tensor t) {
  for (float& v : t.values()) v = std::max(v, 0.0f);
  return t;
}

Tensor fire_oracle(const Tensor& x, const TensorArchive& a, const std::string& p) {
  Tensor s = relu_of(oracle::conv2d(x, a.tensor(p + ".squeeze.weight"), a.tensor(p + ".squeeze.bias"), 1, 0));
  Tensor e1 = oracle::conv2d(s, a.tensor(p + ".expand1x1.weight"), a.tensor(p + ".expand1x1.bias"), 1, 0);
  Tensor e3 = oracle::conv2d(s, a.tensor(p + ".expand3x3.weight"), a.tensor(p + ".expand3x3.bias"), 1, 1);
  std::vector<float> cat(e1.values().begin(), e1.values().end());
  cat.insert(cat.end(), e3.values().begin(), e3.values().end());
  return relu_of(Tensor({e1.dim(0) + e3.dim(0), e1.dim(1), e1.dim(2)}, std::move(cat)));
}

double max_rel(const Tensor& got, const Tensor& want) {
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    d = std::max(d, std::abs(static_cast<double>(got[i]) - want[i]));
    s = std::max(s, std::abs(static_cast<double>(want[i])));
  }
  return d / std::max(s, 1e-30);
}

TEST(BuiltinSpecs, AllValidateAndResolveAliases) {
  for (const auto& name : builtin_spec_names()) EXPECT_NO_THROW(builtin_spec(name).validate()) << name;
  EXPECT_EQ(builtin_spec("squeezenet").name, "squeezenet1_1");
  EXPECT_THROW(builtin_spec("resnet50"), ArgumentError);
}

TEST(BuiltinSpecs, SqueezeNetLayout) {
  NetworkSpec s = builtin_spec("squeezenet1_1");
  EXPECT_EQ(s.layers[0].in_channels, 3);
  EXPECT_EQ(s.layers[0].weight_keys[0], "features.0.weight");
  ASSERT_EQ(s.taps.size(), 3u);
  EXPECT_DOUBLE_EQ(s.taps[0].weight, 0.67);
  EXPECT_DOUBLE_EQ(s.taps[1].weight, 0.2);
  EXPECT_DOUBLE_EQ(s.taps[2].weight, 0.13);
}

TEST(BuiltinSpecs, TapSizesAt224) {
  auto sizes = [](const std::string& name) {
    NetworkSpec spec = builtin_spec(name);
    return Backbone(spec, testing::synthetic_archive(spec)).tap_sizes(224, 224);
  };
  using P = std::pair<int, int>;
  EXPECT_EQ(sizes("squeezenet1_1"), (std::vector<P>{{55, 55}, {27, 27}, {13, 13}}));
  EXPECT_EQ(sizes("vgg16"), (std::vector<P>{{112, 112}, {56, 56}, {28, 28}}));
  EXPECT_EQ(sizes("alexnet"), (std::vector<P>{{27, 27}, {13, 13}, {13, 13}}));
}

TEST(Backbone, SqueezeNetForwardMatchesHandComposedOracle) {
  NetworkSpec spec = builtin_spec("squeezenet1_1");
  TensorArchive a = testing::synthetic_archive(spec, 42);
  Backbone bb(spec, a);
  ImageTensor img = testing::scene_canvas(45, 38, 9);
  FeatureStack got = bb.forward(img);

  Tensor x = img.planar();
  const float mean[3] = {0.485f, 0.456f, 0.406f}, std[3] = {0.229f, 0.224f, 0.225f};
  const std::size_t plane = static_cast<std::size_t>(img.height()) * img.width();
  for (int c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) x[c * plane + i] = (x[c * plane + i] - mean[c]) / std[c];
  }
  x = relu_of(oracle::conv2d(x, a.tensor("features.0.weight"), a.tensor("features.0.bias"), 2, 0));
  x = oracle::maxpool2d(x, 3, 2, 0, true);
  x = fire_oracle(x, a, "features.3");
  Tensor fire3 = fire_oracle(x, a, "features.4");
  x = oracle::maxpool2d(fire3, 3, 2, 0, true);
  x = fire_oracle(x, a, "features.6");
  Tensor fire5 = fire_oracle(x, a, "features.7");
  x = oracle::maxpool2d(fire5, 3, 2, 0, true);
  Tensor fire6 = fire_oracle(x, a, "features.9");

  ASSERT_EQ(got.taps.size(), 3u);
  const Tensor* want[3] = {&fire3, &fire5, &fire6};
  for (int t = 0; t < 3; ++t) {
    ASSERT_EQ(got.taps[t].features.shape(), want[t]->shape()) << got.taps[t].name;
    EXPECT_LE(max_rel(got.taps[t].features, *want[t]), 1e-5) << got.taps[t].name;
  }
  EXPECT_EQ(got.taps[0].name, "fire3");
}

TEST(Backbone, PreActivationTapKeepsNegatives) {
  NetworkSpec spec = builtin_spec("squeezenet1_1");
  for (TapDesc& t : spec.taps) t.activation = TapActivation::kPre;
  Backbone bb(spec, testing::synthetic_archive(spec));
  FeatureStack fs = bb.forward(testing::scene_canvas(40, 40));
  EXPECT_LT(min_value(fs.taps[0].features), 0.0f);
  NetworkSpec post = builtin_spec("squeezenet1_1");
  FeatureStack fp = Backbone(post, testing::synthetic_archive(post)).forward(testing::scene_canvas(40, 40));
  Tensor clamped = fs.taps[0].features;
  for (float& v : clamped.values()) v = std::max(v, 0.0f);
  EXPECT_EQ(clamped, fp.taps[0].features);
}

TEST(Backbone, TooSmallInputNamesTheMinimum) {
  NetworkSpec spec = builtin_spec("squeezenet1_1");
  Backbone bb(spec, testing::synthetic_archive(spec));
  const int mh = bb.min_input_height();
  EXPECT_GT(mh, 1);
  EXPECT_NO_THROW(bb.forward(ImageTensor(mh, bb.min_input_width(), 0.5f)));
  try {
    bb.forward(ImageTensor(mh - 1, bb.min_input_width(), 0.5f));
    FAIL() << "expected InputTooSmallError";
  } catch (const InputTooSmallError& e) {
    EXPECT_EQ(e.min_height(), mh);
    EXPECT_NE(std::string(e.what()).find(std::to_string(mh)), std::string::npos);
  }
}

TEST(Backbone, RejectsArchiveShapeMismatch) {
  NetworkSpec spec = builtin_spec("squeezenet1_1");
  TensorArchive a = testing::synthetic_archive(spec);
  a.entries["features.3.squeeze.weight"] = Tensor({16, 63, 1, 1});
  EXPECT_THROW(Backbone(spec, a), ValidationError);
  a = testing::synthetic_archive(spec);
  a.entries.erase("features.4.expand3x3.bias");
  EXPECT_THROW(Backbone(spec, a), ValidationError);
}

TEST(Backbone, WeightsPastTheLastTapAreOptional) {
  NetworkSpec spec = builtin_spec("squeezenet1_1");
  TensorArchive a = testing::synthetic_archive(spec);
  std::erase_if(a.entries, [](const auto& kv) { return kv.first.starts_with("features.12"); });
  EXPECT_NO_THROW(Backbone(spec, a));
}

NetworkSpec identity_spec() {
  return spec_from_json(R"({
    "name": "probe",
    "layers": [
      {"kind": "conv2d", "in_channels": 3, "out_channels": 3, "kernel": 1,
       "weights": ["c.weight", "c.bias"]},
      {"kind": "relu"}
    ],
    "taps": [{"layer": 0, "name": "c", "weight": 1.0}]
  })");
}

TensorArchive identity_archive() {
  TensorArchive a;
  Tensor w({3, 3, 1, 1}, 0.0f);
  for (int i = 0; i < 3; ++i) w[i * 3 + i] = 1.0f;
  a.entries["c.weight"] = w;
  a.entries["c.bias"] = Tensor({3}, 0.0f);
  a.metadata["preprocess.mean"] = "0.5,0.25,0";
  a.metadata["preprocess.std"] = "0.5,0.25,2";
  a.metadata["spec.name"] = "probe";
  return a;
}

TEST(Backbone, PreprocessingComesFromArchiveUnlessOverridden) {
  ImageTensor img(1, 1, 0.75f);
  FeatureStack fs = forward(identity_spec(), identity_archive(), img);
  EXPECT_FLOAT_EQ(fs.taps[0].features[0], 0.5f);
  EXPECT_FLOAT_EQ(fs.taps[0].features[1], 2.0f);
  EXPECT_FLOAT_EQ(fs.taps[0].features[2], 0.375f);
  NetworkSpec over = identity_spec();
  over.preprocess = Preprocess{};
  EXPECT_FLOAT_EQ(forward(over, identity_archive(), img).taps[0].features[1], 0.75f);
}

TEST(NetworkSpecJson, RoundTripsEveryBuiltin) {
  for (const auto& name : builtin_spec_names()) {
    NetworkSpec s = builtin_spec(name);
    const std::string text = spec_to_json(s);
    EXPECT_EQ(spec_to_json(spec_from_json(text)), text) << name;
  }
}

TEST(NetworkSpecJson, MalformedInput) {
  EXPECT_THROW(spec_from_json("{"), ValidationError);
  EXPECT_THROW(spec_from_json(R"({"name":"x","layers":[{"kind":"dense"}],"taps":[]})"), ValidationError);
}

TEST(NetworkSpecValidate, CatchesInconsistencies) {
  NetworkSpec s = builtin_spec("squeezenet1_1");
  s.taps[0].weight = 0.5;
  EXPECT_THROW(s.validate(), ValidationError);
  s = builtin_spec("squeezenet1_1");
  std::swap(s.taps[0], s.taps[1]);
  EXPECT_THROW(s.validate(), ValidationError);
  s = builtin_spec("squeezenet1_1");
  s.layers[3].in_channels = 32;
  EXPECT_THROW(s.validate(), ValidationError);
  s = builtin_spec("squeezenet1_1");
  s.taps[2].layer = 40;
  EXPECT_THROW(s.validate(), ValidationError);
  s = builtin_spec("vgg16");
  s.taps[0].layer = 7;  // a conv layer
  s.taps[0].activation = TapActivation::kPre;
  EXPECT_THROW(s.validate(), ValidationError);
}

TEST(NetworkSpecValidate, TapWeightOverridesAreRenormalized) {
  NetworkSpec s = builtin_spec("squeezenet1_1").with_tap_weights({2.0, 1.0, 1.0});
  EXPECT_DOUBLE_EQ(s.taps[0].weight, 0.5);
  EXPECT_DOUBLE_EQ(s.taps[2].weight, 0.25);
  EXPECT_THROW(builtin_spec("squeezenet1_1").with_tap_weights({1.0}), ArgumentError);
  EXPECT_THROW(builtin_spec("squeezenet1_1").with_tap_weights({0.0, 0.0, 0.0}), ArgumentError);
}

}  // namespace
}  // namespace puzzlesim
