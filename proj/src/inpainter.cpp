// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/inpainter.hpp"

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <regex>

#include <httplib.h>

#include "puzzlesim/errors.hpp"
#include "puzzlesim/image_io.hpp"

extern char** environ;

namespace puzzlesim {

namespace fs = std::filesystem;

std::size_t BinaryMask::count() const {
  std::size_t n = 0;
  for (float v : values.values()) n += v != 0.0f ? 1 : 0;
  return n;
}

double BinaryMask::area_fraction() const {
  return values.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(values.size());
}

namespace {

void check_mask(const ImageTensor& image, const BinaryMask& mask, const std::string& backend) {
  if (mask.values.rank() != 2 || mask.values.dim(0) != image.height() || mask.values.dim(1) != image.width()) {
    throw BackendError(backend, "mask shape " + shape_string(mask.values.shape()) + " does not match image " +
                                    std::to_string(image.height()) + "x" + std::to_string(image.width()));
  }
}

void check_output(const ImageTensor& image, const ImageTensor& out, const std::string& backend) {
  if (out.height() != image.height() || out.width() != image.width()) {
    throw BackendError(backend, "returned a " + std::to_string(out.height()) + "x" + std::to_string(out.width()) +
                                    " image for a " + std::to_string(image.height()) + "x" +
                                    std::to_string(image.width()) + " request");
  }
}

}  // namespace

ImageTensor composite(const ImageTensor& image, const ImageTensor& inpainted, const BinaryMask& mask) {
  Tensor out = image.planar();
  const std::size_t plane = static_cast<std::size_t>(image.height()) * image.width();
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < plane; ++i) {
      if (mask.values[i] != 0.0f) out[c * plane + i] = inpainted.planar()[c * plane + i];
    }
  }
  return ImageTensor(std::move(out));
}

ImageTensor IdentityInpainter::inpaint(const ImageTensor& image, const BinaryMask& mask) {
  check_mask(image, mask, identity());
  return image;
}

ImageTensor MeanFillInpainter::inpaint(const ImageTensor& image, const BinaryMask& mask) {
  check_mask(image, mask, identity());
  const std::size_t plane = static_cast<std::size_t>(image.height()) * image.width();
  std::array<double, 3> mean{};
  std::size_t kept = 0;
  for (std::size_t i = 0; i < plane; ++i) {
    if (mask.values[i] != 0.0f) continue;
    ++kept;
    for (std::size_t c = 0; c < 3; ++c) mean[c] += image.planar()[c * plane + i];
  }
  if (kept == 0) return image;
  Tensor out = image.planar();
  for (std::size_t c = 0; c < 3; ++c) {
    const float fill = static_cast<float>(mean[c] / static_cast<double>(kept));
    for (std::size_t i = 0; i < plane; ++i) {
      if (mask.values[i] != 0.0f) out[c * plane + i] = fill;
    }
  }
  return ImageTensor(std::move(out));
}

HttpInpainter::HttpInpainter(std::string url, std::chrono::seconds timeout) : url_(std::move(url)), timeout_(timeout) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url_, m, pattern)) throw ArgumentError("malformed inpainter URL '" + url_ + "'");
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
  if (url_.rfind("https://", 0) == 0) {
    throw ArgumentError("'" + url_ + "': this build has no TLS support (configure with OpenSSL)");
  }
#endif
  host_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : std::string("/inpaint");
}

ImageTensor HttpInpainter::inpaint(const ImageTensor& image, const BinaryMask& mask) {
  check_mask(image, mask, url_);
  const std::vector<std::uint8_t> image_png = encode_png(image);
  const std::vector<std::uint8_t> mask_png = encode_mask_png(mask.values);
  httplib::Client client(host_);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  const httplib::MultipartFormDataItems items = {
      {"image", std::string(image_png.begin(), image_png.end()), "image.png", "image/png"},
      {"mask", std::string(mask_png.begin(), mask_png.end()), "mask.png", "image/png"},
  };
  const httplib::Result res = client.Post(path_, items);
  if (!res) throw BackendError(url_, "request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError(url_, "HTTP status " + std::to_string(res->status));
  const auto* body = reinterpret_cast<const std::uint8_t*>(res->body.data());
  ImageTensor out;
  try {
    out = decode_image({body, res->body.size()}, url_);
  } catch (const FormatError& e) {
    throw BackendError(url_, std::string("undecodable response: ") + e.what());
  }
  check_output(image, out, url_);
  return out;
}

SubprocessInpainter::SubprocessInpainter(fs::path executable) : executable_(std::move(executable)) {}

namespace {

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "puzzlesim-XXXXXX").string();
    if (!::mkdtemp(tmpl.data())) throw IoError("cannot create temporary directory: " + std::string(std::strerror(errno)));
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

ImageTensor SubprocessInpainter::inpaint(const ImageTensor& image, const BinaryMask& mask) {
  const std::string who = executable_.string();
  check_mask(image, mask, who);
  TempDir dir;
  const fs::path in = dir.path() / "image.png";
  const fs::path mask_path = dir.path() / "mask.png";
  const fs::path out = dir.path() / "out.png";
  save_png(image, in);
  write_file_bytes(mask_path, encode_mask_png(mask.values));

  std::vector<std::string> args = {who, "--image", in.string(), "--mask", mask_path.string(), "--out", out.string()};
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  pid_t pid = 0;
  const int rc = ::posix_spawn(&pid, who.c_str(), nullptr, nullptr, argv.data(), environ);
  if (rc != 0) throw BackendError(who, std::string("cannot spawn: ") + std::strerror(rc));
  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw BackendError(who, std::string("waitpid failed: ") + std::strerror(errno));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw BackendError(who, WIFEXITED(status) ? "exited with status " + std::to_string(WEXITSTATUS(status))
                                              : std::string("terminated by a signal"));
  }
  ImageTensor result;
  try {
    result = load_image(out);
  } catch (const Error& e) {
    throw BackendError(who, std::string("no readable output: ") + e.what());
  }
  check_output(image, result, who);
  return result;
}

std::unique_ptr<InpainterClient> make_inpainter(const std::string& backend_spec, std::chrono::seconds http_timeout) {
  if (backend_spec == "identity") return std::make_unique<IdentityInpainter>();
  if (backend_spec == "mean-fill") return std::make_unique<MeanFillInpainter>();
  if (backend_spec.rfind("http://", 0) == 0 || backend_spec.rfind("https://", 0) == 0) {
    return std::make_unique<HttpInpainter>(backend_spec, http_timeout);
  }
  if (backend_spec.rfind("exec:", 0) == 0) return std::make_unique<SubprocessInpainter>(backend_spec.substr(5));
  throw ArgumentError("unknown inpainter backend '" + backend_spec +
                      "' (expected identity, mean-fill, http://... or exec:<path>)");
}

}  // namespace puzzlesim
