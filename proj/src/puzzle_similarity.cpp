// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/puzzle_similarity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "archive_codec.hpp"
#include "puzzlesim/errors.hpp"
#include "puzzlesim/image_io.hpp"
#include "puzzlesim/parallel.hpp"

namespace puzzlesim {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr std::uint32_t kIndexVersion = 1;

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  if (s.empty()) return parts;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) parts.push_back(part);
  if (s.back() == sep) parts.emplace_back();
  return parts;
}

}  // namespace

const IndexTap& ReferenceIndex::tap(const std::string& name) const {
  for (const IndexTap& t : taps) {
    if (t.name == name) return t;
  }
  throw IndexMismatchError("reference index has no tap '" + name + "'");
}

NormalizedRows normalize_positions(const Tensor& features) {
  if (features.rank() != 3) throw ShapeError("features must be [C,H,W]");
  NormalizedRows out;
  out.channels = static_cast<std::size_t>(features.dim(0));
  out.count = static_cast<std::size_t>(features.dim(1)) * features.dim(2);
  out.rows.assign(out.count * out.channels, 0.0f);
  out.degenerate.assign(out.count, 0);
  const float* f = features.data();
  for (std::size_t p = 0; p < out.count; ++p) {
    double sq = 0.0;
    for (std::size_t c = 0; c < out.channels; ++c) {
      const double v = f[c * out.count + p];
      sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (!(norm > kZeroNorm)) {
      out.degenerate[p] = 1;
      continue;
    }
    const double inv = 1.0 / norm;
    float* row = out.rows.data() + p * out.channels;
    for (std::size_t c = 0; c < out.channels; ++c) {
      row[c] = static_cast<float>(f[c * out.count + p] * inv);
    }
  }
  return out;
}

ReferenceIndex build_index(std::span<const ImageTensor> refs, const Backbone& backbone,
                           std::vector<std::string> names) {
  if (refs.empty()) throw ArgumentError("build_index: no reference images");
  if (!names.empty() && names.size() != refs.size()) {
    throw ArgumentError("build_index: reference name count does not match image count");
  }
  if (names.empty()) {
    for (std::size_t i = 0; i < refs.size(); ++i) names.push_back("ref" + std::to_string(i));
  }
  const NetworkSpec& spec = backbone.spec();
  std::vector<FeatureStack> stacks(refs.size());
  for (std::size_t n = 0; n < refs.size(); ++n) stacks[n] = backbone.forward(refs[n]);

  ReferenceIndex index;
  index.spec_name = spec.name;
  index.reference_names = std::move(names);
  for (std::size_t t = 0; t < spec.taps.size(); ++t) {
    IndexTap tap;
    tap.name = spec.taps[t].name;
    const std::size_t channels = static_cast<std::size_t>(stacks[0].taps[t].features.dim(0));
    std::vector<float> rows;
    for (std::size_t n = 0; n < refs.size(); ++n) {
      const Tensor& f = stacks[n].taps[t].features;
      const int w = f.dim(2);
      const NormalizedRows norm = normalize_positions(f);
      for (std::size_t p = 0; p < norm.count; ++p) {
        if (norm.degenerate[p]) {
          ++tap.degenerate_excluded;
          continue;
        }
        rows.insert(rows.end(), norm.rows.begin() + static_cast<std::ptrdiff_t>(p * channels),
                    norm.rows.begin() + static_cast<std::ptrdiff_t>((p + 1) * channels));
        tap.origins.push_back({static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(p / w),
                               static_cast<std::uint32_t>(p % w)});
      }
    }
    if (tap.origins.empty()) {
      throw ValidationError("tap '" + tap.name + "' has no non-degenerate reference vectors");
    }
    tap.rows = Tensor({static_cast<int>(tap.origins.size()), static_cast<int>(channels)}, std::move(rows));
    index.taps.push_back(std::move(tap));
  }
  return index;
}

std::vector<std::uint8_t> encode_index(const ReferenceIndex& index) {
  std::map<std::string, Tensor> entries;
  std::map<std::string, std::string> metadata;
  std::vector<std::string> tap_names;
  for (const IndexTap& tap : index.taps) {
    if (tap.name.find_first_of(",/") != std::string::npos) {
      throw ArgumentError("tap name '" + tap.name + "' cannot contain ',' or '/'");
    }
    tap_names.push_back(tap.name);
    entries.emplace("tap/" + tap.name + "/rows", tap.rows);
    Tensor origins({static_cast<int>(tap.origins.size()), 3});
    for (std::size_t r = 0; r < tap.origins.size(); ++r) {
      const RowOrigin& o = tap.origins[r];
      if (std::max({o.image, o.y, o.x}) >= (1u << 24)) throw ArgumentError("row origin exceeds f32 exact range");
      origins[3 * r] = static_cast<float>(o.image);
      origins[3 * r + 1] = static_cast<float>(o.y);
      origins[3 * r + 2] = static_cast<float>(o.x);
    }
    entries.emplace("tap/" + tap.name + "/origins", std::move(origins));
    metadata["tap/" + tap.name + "/degenerate"] = std::to_string(tap.degenerate_excluded);
  }
  metadata["spec.name"] = index.spec_name;
  metadata["taps"] = join(tap_names, ',');
  metadata["references"] = join(index.reference_names, '\n');

  detail::ByteWriter out;
  out.magic("PZIX");
  out.u32(kIndexVersion);
  detail::write_entries(out, entries);
  detail::write_metadata(out, metadata);
  return std::move(out.bytes());
}

ReferenceIndex decode_index(std::span<const std::uint8_t> bytes, const std::string& origin) {
  detail::ByteReader in(bytes, origin);
  in.expect_magic("PZIX");
  const std::uint32_t version = in.u32();
  if (version != kIndexVersion) in.fail("unsupported index version " + std::to_string(version));
  auto entries = detail::read_entries(in);
  auto metadata = detail::read_metadata(in);
  if (!in.at_end()) in.fail("trailing bytes after metadata");

  auto meta = [&](const std::string& key) -> const std::string& {
    auto it = metadata.find(key);
    if (it == metadata.end()) throw ValidationError(origin + ": index metadata is missing '" + key + "'");
    return it->second;
  };
  ReferenceIndex index;
  index.spec_name = meta("spec.name");
  index.reference_names = split(meta("references"), '\n');
  for (const std::string& name : split(meta("taps"), ',')) {
    IndexTap tap;
    tap.name = name;
    auto rows = entries.find("tap/" + name + "/rows");
    auto origins = entries.find("tap/" + name + "/origins");
    if (rows == entries.end() || origins == entries.end()) {
      throw ValidationError(origin + ": index is missing tensors for tap '" + name + "'");
    }
    if (rows->second.rank() != 2 || origins->second.rank() != 2 || origins->second.dim(1) != 3 ||
        origins->second.dim(0) != rows->second.dim(0)) {
      throw ValidationError(origin + ": inconsistent tensor shapes for tap '" + name + "'");
    }
    tap.rows = std::move(rows->second);
    const Tensor& o = origins->second;
    tap.origins.resize(static_cast<std::size_t>(o.dim(0)));
    for (std::size_t r = 0; r < tap.origins.size(); ++r) {
      tap.origins[r] = {static_cast<std::uint32_t>(o[3 * r]), static_cast<std::uint32_t>(o[3 * r + 1]),
                        static_cast<std::uint32_t>(o[3 * r + 2])};
    }
    try {
      tap.degenerate_excluded = std::stoull(meta("tap/" + name + "/degenerate"));
    } catch (const std::logic_error&) {
      throw ValidationError(origin + ": bad degenerate count for tap '" + name + "'");
    }
    index.taps.push_back(std::move(tap));
  }
  if (index.taps.empty()) throw ValidationError(origin + ": index has no taps");
  return index;
}

void save_index(const ReferenceIndex& index, const std::filesystem::path& path) {
  write_file_bytes(path, encode_index(index));
}

ReferenceIndex load_index(const std::filesystem::path& path) {
  return decode_index(read_file_bytes(path), path.string());
}

SimilarityMap puzzle_similarity(const ImageTensor& test, const ReferenceIndex& index, const Backbone& backbone,
                                const SimilarityOptions& options) {
  const NetworkSpec& spec = backbone.spec();
  if (index.spec_name != spec.name) {
    throw IndexMismatchError("index was built with network '" + index.spec_name + "', not '" + spec.name + "'");
  }
  const FeatureStack stack = backbone.forward(test);
  const int h = test.height();
  const int w = test.width();
  SimilarityMap result;
  result.values = Tensor({h, w}, 0.0f);

  for (std::size_t t = 0; t < spec.taps.size(); ++t) {
    const TapDesc& tap_desc = spec.taps[t];
    const IndexTap& tap = index.tap(tap_desc.name);
    const Tensor& features = stack.taps[t].features;
    const int lh = features.dim(1);
    const int lw = features.dim(2);
    if (static_cast<std::size_t>(features.dim(0)) != tap.channels()) {
      throw IndexMismatchError("tap '" + tap.name + "' has " + std::to_string(features.dim(0)) +
                               " channels but the index stores " + std::to_string(tap.channels()));
    }
    const NormalizedRows query = normalize_positions(features);
    const TileSizes tiles = autotune_tiles(options.tiles, query.channels, options.memory_budget_bytes, max_threads());
    const std::vector<float> best =
        max_cosine_tiled({query.rows, query.count, query.channels}, tap.view(), tiles);

    SimilarityLayer layer;
    layer.name = tap.name;
    layer.weight = tap_desc.weight;
    layer.values = Tensor({lh, lw});
    layer.degenerate = Tensor({lh, lw}, 0.0f);
    for (std::size_t p = 0; p < query.count; ++p) {
      if (query.degenerate[p]) {
        layer.degenerate[p] = 1.0f;
        layer.values[p] = 0.0f;
      } else {
        layer.values[p] = std::clamp(best[p], -1.0f, 1.0f);
      }
    }
    const Tensor up = bilinear_resize(layer.values, h, w);
    const float weight = static_cast<float>(tap_desc.weight);
    for (std::size_t i = 0; i < up.size(); ++i) result.values[i] += weight * up[i];
    result.layers.push_back(std::move(layer));
  }
  for (float& v : result.values.values()) v = std::clamp(v, -1.0f, 1.0f);
  return result;
}

}  // namespace puzzlesim
