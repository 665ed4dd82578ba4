// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "puzzlesim/inpainter.hpp"
#include "puzzlesim/puzzle_similarity.hpp"

namespace puzzlesim {

struct ThresholdSchedule {
  std::vector<double> candidates;  // non-decreasing
  int n_candidates = 50;
  double alpha = 0.05;
  // Set by initial() when the map is constant (min == mean); no candidates.
  bool converged = false;

  // tau_i = min + i/(N-1) * (mean - min), i = 0..N-1.
  static ThresholdSchedule initial(const Tensor& sim, int n_candidates);

  // N thresholds spread evenly over previous_tau +- alpha * (max - min). Falls
  // back to initial() when the window lies entirely below min(sim).
  static ThresholdSchedule refined(const Tensor& sim, double previous_tau, double alpha, int n_candidates);
};

// mask(h,w) = 1 iff sim(h,w) <= tau, one mask per candidate in order. Empty
// when the schedule has no candidates.
std::vector<BinaryMask> make_masks(const Tensor& sim, const ThresholdSchedule& schedule);

struct CandidateScore {
  double delta = 0.0;
  double mask_area_fraction = 0.0;
  double mean_sim_before = 0.0;
  double mean_sim_after = 0.0;
};

// delta = mean(after) - mean(before) - lambda * area_fraction(mask).
// Throws ArgumentError for an empty mask and ShapeError for mismatched shapes.
CandidateScore score_candidate(const Tensor& before, const Tensor& after, const BinaryMask& mask, double lambda);

struct InpaintConfig {
  int n_candidates = 50;
  double alpha = 0.05;
  double lambda = 0.05;
  int max_rounds = 10;
  int max_in_flight = 2;
  SimilarityOptions similarity;
};

struct TraceEntry {
  int round = 0;
  std::optional<double> tau;  // best candidate's threshold
  double delta = 0.0;         // best candidate's delta
  double mask_fraction = 0.0;
  double mean_sim = 0.0;  // mean fused similarity after the round
  bool accepted = false;
  int candidates = 0;
};

enum class InpaintStatus { kConverged, kRoundLimit, kBackendError };

struct InpaintResult {
  ImageTensor image;
  std::vector<TraceEntry> trace;
  InpaintStatus status = InpaintStatus::kConverged;
  std::string error;
  double initial_mean_sim = 0.0;
  int accepted_rounds = 0;
  std::vector<BinaryMask> accepted_masks;  // one per accepted round
};

// Progressive inpainting: threshold the fused similarity map into candidate
// masks, inpaint every candidate, keep the one with the largest delta while it
// is positive. A backend failure stops the loop and returns the last accepted
// image with status kBackendError.
InpaintResult inpaint_iteratively(const ImageTensor& test, const ReferenceIndex& index, const Backbone& backbone,
                                  InpainterClient& inpainter, const InpaintConfig& config = {});

// One JSON object per line: {"round","tau","delta","mask_fraction","mean_sim","accepted"}.
std::string trace_jsonl(const std::vector<TraceEntry>& trace);

}  // namespace puzzlesim
