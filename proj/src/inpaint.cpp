// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/inpaint.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "puzzlesim/errors.hpp"

namespace puzzlesim {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return v;
}

}  // namespace

ThresholdSchedule ThresholdSchedule::initial(const Tensor& sim, int n_candidates) {
  if (n_candidates < 1) throw ArgumentError("need at least one threshold candidate");
  ThresholdSchedule s;
  s.n_candidates = n_candidates;
  const double lo = min_value(sim);
  const double mean = mean_value(sim);
  if (!(mean > lo)) {
    s.converged = true;
    return s;
  }
  s.candidates = linspace(lo, mean, n_candidates);
  return s;
}

ThresholdSchedule ThresholdSchedule::refined(const Tensor& sim, double previous_tau, double alpha, int n_candidates) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in (0, 1]");
  const double lo = min_value(sim);
  const double hi = max_value(sim);
  const double half = alpha * (hi - lo);
  if (previous_tau + half < lo) return initial(sim, n_candidates);
  ThresholdSchedule s;
  s.n_candidates = n_candidates;
  s.alpha = alpha;
  s.candidates = linspace(previous_tau - half, previous_tau + half, n_candidates);
  return s;
}

std::vector<BinaryMask> make_masks(const Tensor& sim, const ThresholdSchedule& schedule) {
  if (sim.rank() != 2) throw ShapeError("similarity map must be [H,W]");
  std::vector<BinaryMask> masks;
  masks.reserve(schedule.candidates.size());
  for (double tau : schedule.candidates) {
    BinaryMask m{Tensor(sim.shape(), 0.0f)};
    for (std::size_t i = 0; i < sim.size(); ++i) m.values[i] = sim[i] <= tau ? 1.0f : 0.0f;
    masks.push_back(std::move(m));
  }
  return masks;
}

CandidateScore score_candidate(const Tensor& before, const Tensor& after, const BinaryMask& mask, double lambda) {
  if (before.shape() != after.shape() || before.shape() != mask.values.shape()) {
    throw ShapeError("score_candidate: shapes differ");
  }
  const std::size_t count = mask.count();
  if (count == 0) throw ArgumentError("score_candidate: empty mask");
  CandidateScore s;
  s.mask_area_fraction = static_cast<double>(count) / static_cast<double>(mask.values.size());
  s.mean_sim_before = mean_value(before);
  s.mean_sim_after = mean_value(after);
  s.delta = s.mean_sim_after - s.mean_sim_before - lambda * s.mask_area_fraction;
  return s;
}

namespace {

struct Candidate {
  double tau = 0.0;
  std::size_t area = 0;
  std::optional<ImageTensor> image;
  std::optional<Tensor> after;
  std::optional<CandidateScore> score;
};

}  // namespace

InpaintResult inpaint_iteratively(const ImageTensor& test, const ReferenceIndex& index, const Backbone& backbone,
                                  InpainterClient& inpainter, const InpaintConfig& config) {
  if (config.n_candidates < 1 || config.max_rounds < 1 || config.max_in_flight < 1) {
    throw ArgumentError("inpaint: candidate count, round limit and in-flight limit must be >= 1");
  }
  InpaintResult result;
  result.image = test;
  Tensor current_sim = puzzle_similarity(test, index, backbone, config.similarity).values;
  double current_mean = mean_value(current_sim);
  result.initial_mean_sim = current_mean;
  std::optional<double> accepted_tau;

  for (int round = 1; round <= config.max_rounds; ++round) {
    const ThresholdSchedule schedule =
        accepted_tau ? ThresholdSchedule::refined(current_sim, *accepted_tau, config.alpha, config.n_candidates)
                     : ThresholdSchedule::initial(current_sim, config.n_candidates);
    TraceEntry entry;
    entry.round = round;
    entry.mean_sim = current_mean;
    if (schedule.converged) {
      entry.delta = 0.0;
      result.trace.push_back(entry);
      result.status = InpaintStatus::kConverged;
      return result;
    }

    const std::vector<BinaryMask> masks = make_masks(current_sim, schedule);
    std::vector<Candidate> candidates(masks.size());
    // Masks are nested, so equal areas mean equal masks; only the first of
    // each distinct mask is sent to the backend.
    std::vector<std::size_t> unique;
    for (std::size_t i = 0; i < masks.size(); ++i) {
      candidates[i].tau = schedule.candidates[i];
      candidates[i].area = masks[i].count();
      if (candidates[i].area == 0) continue;
      if (!unique.empty() && candidates[unique.back()].area == candidates[i].area) continue;
      unique.push_back(i);
    }
    entry.candidates = static_cast<int>(unique.size());

    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::optional<BackendError> backend_error;
    std::exception_ptr other_error;
    auto worker = [&] {
      for (;;) {
        const std::size_t k = next.fetch_add(1);
        if (k >= unique.size()) return;
        {
          std::lock_guard lock(error_mutex);
          if (backend_error || other_error) return;
        }
        const std::size_t i = unique[k];
        try {
          const ImageTensor raw = inpainter.inpaint(result.image, masks[i]);
          if (raw.height() != result.image.height() || raw.width() != result.image.width()) {
            throw BackendError(inpainter.identity(), "returned an image of the wrong size");
          }
          ImageTensor filled = composite(result.image, raw, masks[i]);
          Tensor after = puzzle_similarity(filled, index, backbone, config.similarity).values;
          candidates[i].score = score_candidate(current_sim, after, masks[i], config.lambda);
          candidates[i].after = std::move(after);
          candidates[i].image = std::move(filled);
        } catch (const BackendError& e) {
          std::lock_guard lock(error_mutex);
          if (!backend_error) backend_error = e;
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!other_error) other_error = std::current_exception();
        }
      }
    };
    {
      const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_in_flight), unique.size());
      std::vector<std::jthread> pool;
      for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
      worker();
    }
    if (other_error) std::rethrow_exception(other_error);
    if (backend_error) {
      result.status = InpaintStatus::kBackendError;
      result.error = backend_error->what();
      return result;
    }

    std::optional<std::size_t> best;
    for (std::size_t i : unique) {
      if (!best || candidates[i].score->delta > candidates[*best].score->delta) best = i;
    }
    if (!best) {
      // Every candidate mask was empty: nothing left to inpaint.
      result.trace.push_back(entry);
      result.status = InpaintStatus::kConverged;
      return result;
    }
    const Candidate& chosen = candidates[*best];
    entry.tau = chosen.tau;
    entry.delta = chosen.score->delta;
    entry.mask_fraction = chosen.score->mask_area_fraction;
    if (!(chosen.score->delta > 0.0)) {
      result.trace.push_back(entry);
      result.status = InpaintStatus::kConverged;
      return result;
    }

    if (chosen.score->mean_sim_after < current_mean) {
      throw std::logic_error("accepted inpainting lowered the mean similarity");
    }
    result.image = *chosen.image;
    current_sim = *chosen.after;
    current_mean = chosen.score->mean_sim_after;
    accepted_tau = chosen.tau;
    result.accepted_masks.push_back(masks[*best]);
    entry.accepted = true;
    entry.mean_sim = current_mean;
    result.trace.push_back(entry);
    ++result.accepted_rounds;
  }
  result.status = InpaintStatus::kRoundLimit;
  return result;
}

std::string trace_jsonl(const std::vector<TraceEntry>& trace) {
  std::string out;
  for (const TraceEntry& e : trace) {
    nlohmann::ordered_json j;
    j["round"] = e.round;
    j["tau"] = e.tau ? nlohmann::ordered_json(*e.tau) : nlohmann::ordered_json(nullptr);
    j["delta"] = e.delta;
    j["mask_fraction"] = e.mask_fraction;
    j["mean_sim"] = e.mean_sim;
    j["accepted"] = e.accepted;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace puzzlesim
