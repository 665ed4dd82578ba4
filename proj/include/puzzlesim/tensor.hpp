// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace puzzlesim {

// Dense row-major float tensor. Shape dimensions are all >= 1 and the data
// buffer always holds exactly product(shape) values.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);
  Tensor(std::vector<int> shape, std::vector<float> data);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<float> values() { return data_; }
  std::span<const float> values() const { return data_; }
  float* data() { return data_.data(); }
  const float* data() const { return data_.data(); }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }

  // Same data, new shape with an equal element count.
  Tensor reshaped(std::vector<int> shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::string shape_string(const std::vector<int>& shape);
std::size_t shape_product(const std::vector<int>& shape);

float min_value(const Tensor& t);
float max_value(const Tensor& t);
// Mean accumulated in double.
double mean_value(const Tensor& t);
bool all_finite(const Tensor& t);

// Align-corners bilinear resampling of the trailing two axes. Accepts rank 2
// ([H,W]) or rank 3 ([C,H,W]) tensors.
Tensor bilinear_resize(const Tensor& t, int out_h, int out_w);

// RGB image stored planar as [3,H,W] with every value in [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  // Throws ValidationError unless the tensor is [3,H,W] with values in [0,1].
  explicit ImageTensor(Tensor planar);
  ImageTensor(int height, int width, float fill = 0.0f);

  int height() const { return planar_.empty() ? 0 : planar_.dim(1); }
  int width() const { return planar_.empty() ? 0 : planar_.dim(2); }
  static constexpr int channels() { return 3; }

  const Tensor& planar() const { return planar_; }
  float at(int c, int y, int x) const {
    return planar_[(static_cast<std::size_t>(c) * height() + y) * width() + x];
  }
  void set(int c, int y, int x, float v);

  bool operator==(const ImageTensor& other) const = default;

 private:
  Tensor planar_;
};

}  // namespace puzzlesim
