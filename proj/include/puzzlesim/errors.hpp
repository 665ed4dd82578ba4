// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace puzzlesim {

// Root of every error the library throws. The subclasses map one-to-one onto
// the failure classes callers are expected to distinguish (the CLI turns them
// into exit codes).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class InputTooSmallError : public Error {
 public:
  InputTooSmallError(const std::string& what, int min_height, int min_width)
      : Error(what), min_height_(min_height), min_width_(min_width) {}

  int min_height() const { return min_height_; }
  int min_width() const { return min_width_; }

 private:
  int min_height_;
  int min_width_;
};

class IndexMismatchError : public Error {
 public:
  using Error::Error;
};

// Raised by inpainting backends; carries the backend identity (URL or exe).
class BackendError : public Error {
 public:
  BackendError(const std::string& backend, const std::string& what)
      : Error(backend + ": " + what), backend_(backend) {}

  const std::string& backend() const { return backend_; }

 private:
  std::string backend_;
};

}  // namespace puzzlesim
