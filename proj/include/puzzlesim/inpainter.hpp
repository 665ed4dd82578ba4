// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>

#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

struct BinaryMask {
  Tensor values;  // [H,W] in {0,1}; 1 = inpaint

  std::size_t count() const;
  double area_fraction() const;
  bool empty() const { return count() == 0; }
};

// Contract shared by every inpainting backend: return an image of the input's
// shape. Callers never send an empty mask. Failures raise BackendError.
class InpainterClient {
 public:
  virtual ~InpainterClient() = default;
  virtual ImageTensor inpaint(const ImageTensor& image, const BinaryMask& mask) = 0;
  // URL, executable path or stub name, used in error messages.
  virtual std::string identity() const = 0;
};

// Returns its input unchanged.
class IdentityInpainter final : public InpainterClient {
 public:
  ImageTensor inpaint(const ImageTensor& image, const BinaryMask& mask) override;
  std::string identity() const override { return "identity"; }
};

// Fills masked pixels with the per-channel mean of the unmasked ones.
class MeanFillInpainter final : public InpainterClient {
 public:
  ImageTensor inpaint(const ImageTensor& image, const BinaryMask& mask) override;
  std::string identity() const override { return "mean-fill"; }
};

// POST <url> as multipart/form-data with `image` (RGB PNG) and `mask`
// (1-bit PNG, white = inpaint); expects a PNG body with status 200.
class HttpInpainter final : public InpainterClient {
 public:
  explicit HttpInpainter(std::string url, std::chrono::seconds timeout = std::chrono::seconds(300));
  ImageTensor inpaint(const ImageTensor& image, const BinaryMask& mask) override;
  std::string identity() const override { return url_; }

 private:
  std::string url_;
  std::string host_;  // scheme://host:port
  std::string path_;
  std::chrono::seconds timeout_;
};

// Runs `<exe> --image <in.png> --mask <mask.png> --out <out.png>` and reads
// the output PNG; exit status 0 means success.
class SubprocessInpainter final : public InpainterClient {
 public:
  explicit SubprocessInpainter(std::filesystem::path executable);
  ImageTensor inpaint(const ImageTensor& image, const BinaryMask& mask) override;
  std::string identity() const override { return executable_.string(); }

 private:
  std::filesystem::path executable_;
};

// "identity", "mean-fill", "http://host:port[/path]" (default path /inpaint)
// or "exec:<path>".
std::unique_ptr<InpainterClient> make_inpainter(const std::string& backend_spec,
                                                std::chrono::seconds http_timeout = std::chrono::seconds(300));

// Keeps `image` wherever the mask is 0 and takes `inpainted` elsewhere.
ImageTensor composite(const ImageTensor& image, const ImageTensor& inpainted, const BinaryMask& mask);

}  // namespace puzzlesim
