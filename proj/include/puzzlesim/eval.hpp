// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puzzlesim/tensor.hpp"

namespace puzzlesim {

// Binary masks from every participant for one rendering and their mean.
struct HumanMaskSet {
  std::string scene;
  std::string sample;
  std::vector<std::filesystem::path> files;
  std::vector<Tensor> masks;  // [H,W] in {0,1}
  Tensor mean_map;            // [H,W] in [0,1]
};

// Average of binary masks; throws ValidationError on shape mismatch.
Tensor average_masks(const std::vector<Tensor>& masks);

// Reads <root>/<scene>/<sample>/<participant>.png, binarizing gray level at
// 0.5. Scenes, samples and participants are visited in sorted order.
std::vector<HumanMaskSet> ingest_annotations(const std::filesystem::path& root);

struct LogisticParams {
  double a1 = 0.0;
  double a2 = 0.0;
  double a3 = 0.0;
  double a4 = 1.0;
  double a5 = 0.0;

  static LogisticParams identity() { return {}; }
  bool operator==(const LogisticParams&) const = default;
};

// q(x) = a1 * (1/2 - 1/(1 + exp(a2 (x - a3)))) + a4 x + a5
double logistic(double x, const LogisticParams& p);

struct Correlation {
  double value = 0.0;
  // Set when either input is constant; value is then 0.
  bool degenerate = false;
};

Correlation pearson(std::span<const float> a, std::span<const float> b);
Correlation pearson(std::span<const double> a, std::span<const double> b);
// Pearson correlation of average ranks (ties share their mean rank).
Correlation spearman(std::span<const float> a, std::span<const float> b);
Correlation spearman(const Tensor& metric_map, const Tensor& human_map);

struct FitOptions {
  int starts = 8;
  int iterations = 500;
  double step = 1e-2;
  // Larger maps are fitted on a deterministic strided subsample; the reported
  // PCC always uses every pixel.
  std::size_t max_fit_samples = 1 << 14;
  std::uint64_t seed = 0;
};

struct LogisticFit {
  LogisticParams params;
  double pcc = 0.0;
  double pcc_raw = 0.0;
  bool degenerate = false;
};

// Multi-start gradient ascent on PCC(q(metric), human). The identity and its
// sign flip are always among the starts and the result is never worse than
// the identity on the full data.
LogisticFit fit_logistic_pcc(std::span<const float> metric, std::span<const float> human, const FitOptions& options = {});
LogisticFit fit_logistic_pcc(const Tensor& metric_map, const Tensor& human_map, const FitOptions& options = {});

enum class FitScope { kPerSample, kPerScene, kGlobal };
FitScope parse_fit_scope(const std::string& name);

struct EvalOptions {
  FitOptions fit;
  FitScope scope = FitScope::kPerSample;
};

struct SampleResult {
  std::string scene;
  std::string sample;
  double pcc_raw = 0.0;
  double pcc_fit = 0.0;
  double srcc = 0.0;
  LogisticParams params;
  bool degenerate = false;
};

struct SceneResult {
  std::string scene;
  double pcc = 0.0;
  double srcc = 0.0;
  std::size_t samples = 0;
};

struct CorrelationReport {
  std::vector<SampleResult> samples;
  std::vector<SceneResult> scenes;  // scenes with every sample evaluated
  double pcc_mean = 0.0;
  double pcc_std = 0.0;  // population std over scenes
  double srcc_mean = 0.0;
  double srcc_std = 0.0;
  std::vector<std::string> missing;  // "<scene>/<sample>" without a map
  std::vector<std::string> excluded_scenes;

  bool complete() const { return missing.empty(); }
};

// Returns the metric map for a sample, or nullopt when it does not exist.
using MapLookup = std::function<std::optional<Tensor>(const std::string& scene, const std::string& sample)>;

// Metric maps are bilinearly resampled to the human-map resolution before
// scoring.
CorrelationReport evaluate(const std::vector<HumanMaskSet>& annotations, const MapLookup& lookup,
                           const EvalOptions& options = {});

// Maps are PZSM sidecars at <maps_dir>/<scene>/<sample>.pzsm.
CorrelationReport evaluate(const std::filesystem::path& maps_dir, const std::filesystem::path& annotations_root,
                           const EvalOptions& options = {});

// scene,sample,pcc_raw,pcc_fit,srcc,a1,a2,a3,a4,a5
std::string report_csv(const CorrelationReport& report);
std::string report_table(const CorrelationReport& report);

}  // namespace puzzlesim
