// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

// Compares the forward pass against torchvision on randomly initialised
// weights. Skipped when python3 with torch/torchvision is not available.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <fstream>
#include <string>

#include "fixtures.hpp"
#include "puzzlesim/archive.hpp"
#include "puzzlesim/image_io.hpp"
#include "puzzlesim/network.hpp"

namespace puzzlesim {
namespace {

class TorchParity : public ::testing::TestWithParam<std::string> {};

// Odd sizes exercise the ceil-mode pooling edges.
std::string sizes_for(const std::string& name) {
  if (name == "vgg16") return "64x64,45x77,96x80";
  if (name == "alexnet") return "224x224,67x99,131x160";
  return "224x224,97x131,160x201";
}

TEST_P(TorchParity, TapsMatchTorchvision) {
  const std::string python = PUZZLESIM_PYTHON;
  if (python.empty()) GTEST_SKIP() << "python3 not found at configure time";
  const std::string name = GetParam();
  const std::string sizes = sizes_for(name);
  testing::TempDir dir;
  const NetworkSpec spec = builtin_spec(name);
  std::ofstream(dir / "spec.json") << spec_to_json(spec);

  const std::string cmd = python + " " + PUZZLESIM_PARITY_SCRIPT + " --spec " + (dir / "spec.json").string() +
                          " --out " + dir.path().string() + " --sizes " + sizes;
  const int status = std::system(cmd.c_str());
  ASSERT_TRUE(WIFEXITED(status));
  if (WEXITSTATUS(status) == 77) GTEST_SKIP() << "torch/torchvision not importable";
  ASSERT_EQ(WEXITSTATUS(status), 0) << cmd;

  const Backbone backbone(spec, load_archive(dir / "net.pzta"));
  const TensorArchive want = load_archive(dir / "taps.pzta");
  int images = 0;
  for (; std::filesystem::exists(dir / ("img" + std::to_string(images) + ".png")); ++images) {
    const ImageTensor img = load_image(dir / ("img" + std::to_string(images) + ".png"));
    const FeatureStack got = backbone.forward(img);
    for (std::size_t t = 0; t < spec.taps.size(); ++t) {
      const Tensor& ours = got.taps[t].features;
      const Tensor& theirs = want.tensor("img" + std::to_string(images) + "/" + spec.taps[t].name);
      ASSERT_EQ(ours.shape(), theirs.shape()) << name << " image " << images << " tap " << spec.taps[t].name;
      double diff = 0.0, scale = 0.0;
      for (std::size_t i = 0; i < ours.size(); ++i) {
        diff = std::max(diff, std::abs(static_cast<double>(ours[i]) - theirs[i]));
        scale = std::max(scale, std::abs(static_cast<double>(theirs[i])));
      }
      EXPECT_LE(diff / scale, 1e-4) << name << " image " << images << " tap " << spec.taps[t].name;
    }
  }
  EXPECT_EQ(images, 3);
}

INSTANTIATE_TEST_SUITE_P(Builtins, TorchParity,
                         ::testing::Values("squeezenet1_1", "alexnet", "vgg16"),
                         [](const auto& info) { return info.param; });

}  // namespace
}  // namespace puzzlesim
