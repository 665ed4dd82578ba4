// Copyright 2026 The PuzzleSim Authors
// SPDX-License-Identifier: Apache-2.0

#include "puzzlesim/eval.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>

#include "puzzlesim/errors.hpp"
#include "puzzlesim/image_io.hpp"
#include "puzzlesim/parallel.hpp"

namespace puzzlesim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Annotations

Tensor average_masks(const std::vector<Tensor>& masks) {
  if (masks.empty()) throw ArgumentError("average_masks: no masks");
  const std::vector<int>& shape = masks.front().shape();
  std::vector<std::uint32_t> counts(masks.front().size(), 0);
  for (const Tensor& m : masks) {
    if (m.shape() != shape) {
      throw ValidationError("mask shapes differ: " + shape_string(m.shape()) + " vs " + shape_string(shape));
    }
    for (std::size_t i = 0; i < m.size(); ++i) counts[i] += m[i] != 0.0f ? 1u : 0u;
  }
  Tensor mean(shape);
  const double n = static_cast<double>(masks.size());
  for (std::size_t i = 0; i < counts.size(); ++i) mean[i] = static_cast<float>(counts[i] / n);
  return mean;
}

namespace {

std::vector<fs::path> sorted_entries(const fs::path& dir, bool directories) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (directories ? e.is_directory() : e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

Tensor binarize(const ImageTensor& image) {
  Tensor mask({image.height(), image.width()});
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const float gray = (image.at(0, y, x) + image.at(1, y, x) + image.at(2, y, x)) / 3.0f;
      mask[static_cast<std::size_t>(y) * image.width() + x] = gray >= 0.5f ? 1.0f : 0.0f;
    }
  }
  return mask;
}

}  // namespace

std::vector<HumanMaskSet> ingest_annotations(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("annotation root " + root.string() + " is not a directory");
  std::vector<HumanMaskSet> sets;
  for (const fs::path& scene_dir : sorted_entries(root, true)) {
    for (const fs::path& sample_dir : sorted_entries(scene_dir, true)) {
      HumanMaskSet set;
      set.scene = scene_dir.filename().string();
      set.sample = sample_dir.filename().string();
      for (const fs::path& file : sorted_entries(sample_dir, false)) {
        if (!is_image_file(file)) continue;
        set.files.push_back(file);
        set.masks.push_back(binarize(load_image(file)));
      }
      if (set.masks.empty()) continue;
      for (std::size_t i = 1; i < set.masks.size(); ++i) {
        if (set.masks[i].shape() != set.masks[0].shape()) {
          throw ValidationError("mask " + set.files[i].string() + " is " + shape_string(set.masks[i].shape()) +
                                " but " + set.files[0].string() + " is " + shape_string(set.masks[0].shape()));
        }
      }
      set.mean_map = average_masks(set.masks);
      sets.push_back(std::move(set));
    }
  }
  return sets;
}

// ---------------------------------------------------------------------------
// Correlation

double logistic(double x, const LogisticParams& p) {
  const double z = p.a2 * (x - p.a3);
  // 1/2 - 1/(1+e^z) written to stay finite for any z.
  const double bracket = z >= 0 ? 0.5 - std::exp(-z) / (1.0 + std::exp(-z)) : 0.5 - 1.0 / (1.0 + std::exp(z));
  return p.a1 * bracket + p.a4 * x + p.a5;
}

namespace {

template <typename T, typename U>
Correlation pearson_impl(std::span<const T> a, std::span<const U> b) {
  if (a.size() != b.size()) throw ShapeError("correlation inputs differ in length");
  if (a.empty()) return {0.0, true};
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) return {0.0, true};
  return {std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0), false};
}

std::vector<double> average_ranks(std::span<const float> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    const double mean_rank = 0.5 * static_cast<double>(i + j - 1) + 1.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = mean_rank;
    i = j;
  }
  return ranks;
}

}  // namespace

Correlation pearson(std::span<const float> a, std::span<const float> b) { return pearson_impl(a, b); }
Correlation pearson(std::span<const double> a, std::span<const double> b) { return pearson_impl(a, b); }

Correlation spearman(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ShapeError("correlation inputs differ in length");
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  return pearson(std::span<const double>(ra), std::span<const double>(rb));
}

Correlation spearman(const Tensor& metric_map, const Tensor& human_map) {
  if (metric_map.shape() != human_map.shape()) throw ShapeError("spearman: map shapes differ");
  return spearman(metric_map.values(), human_map.values());
}

// ---------------------------------------------------------------------------
// Logistic fit
//
// The ascent runs on standardized inputs u = (x - mu) / sigma with parameters
// b; PCC is invariant to the affine change of variable, and the result is
// mapped back to the raw-x parameterization at the end.

namespace {

using Params = std::array<double, 5>;

class PccObjective {
 public:
  PccObjective(std::vector<double> u, std::vector<double> h) : u_(std::move(u)), h_(std::move(h)) {
    const double n = static_cast<double>(h_.size());
    const double mean = std::accumulate(h_.begin(), h_.end(), 0.0) / n;
    shh_ = 0.0;
    for (double& v : h_) {
      v -= mean;
      shh_ += v * v;
    }
    q_.resize(u_.size());
    s_.resize(u_.size());
  }

  double value(const Params& b) {
    eval_q(b);
    return pcc();
  }

  const std::vector<double>& inputs() const { return u_; }

  // Replaces the linear coefficients b[0], b[3], b[4] with the least-squares
  // regression of h on (0.5 - s, u). For fixed slope and centre that choice
  // maximizes PCC, so the result is never worse than `b`.
  Params project(Params b) {
    const double before = value(b);
    const double n = static_cast<double>(u_.size());
    double gm = 0.0, um = 0.0;
    std::vector<double> g(u_.size());
    for (std::size_t i = 0; i < u_.size(); ++i) {
      g[i] = 0.5 - s_[i];
      gm += g[i];
      um += u_[i];
    }
    gm /= n;
    um /= n;
    double sgg = 0.0, suu = 0.0, sgu = 0.0, sgh = 0.0, suh = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const double dg = g[i] - gm;
      const double du = u_[i] - um;
      sgg += dg * dg;
      suu += du * du;
      sgu += dg * du;
      sgh += dg * h_[i];
      suh += du * h_[i];
    }
    const double det = sgg * suu - sgu * sgu;
    Params out = b;
    if (det > 1e-12 * sgg * suu) {
      out[0] = (suu * sgh - sgu * suh) / det;
      out[3] = (sgg * suh - sgu * sgh) / det;
    } else if (suu > 0.0) {
      out[0] = 0.0;
      out[3] = suh / suu;
    } else {
      return b;
    }
    out[4] = 0.0;
    return value(out) >= before ? out : b;
  }

  // Returns PCC and writes its gradient with respect to b.
  double gradient(const Params& b, Params& grad) {
    eval_q(b);
    const double r = pcc();
    grad.fill(0.0);
    if (!(sqq_ > 0.0)) return r;
    const double inv_norm = 1.0 / std::sqrt(sqq_ * shh_);
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const double dr_dq = h_[i] * inv_norm - r * (q_[i] - qmean_) / sqq_;
      const double s = s_[i];
      const double ds = s * (1.0 - s);
      grad[0] += dr_dq * (0.5 - s);
      grad[1] += dr_dq * b[0] * ds * (u_[i] - b[2]);
      grad[2] += dr_dq * b[0] * ds * -b[1];
      grad[3] += dr_dq * u_[i];
    }
    return r;
  }

 private:
  static double sigmoid_neg(double z) {
    // 1 / (1 + e^z)
    if (z >= 0) {
      const double e = std::exp(-z);
      return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(z));
  }

  void eval_q(const Params& b) {
    if (cached_ && b == last_) return;
    double sum = 0.0;
    for (std::size_t i = 0; i < u_.size(); ++i) {
      const double s = sigmoid_neg(b[1] * (u_[i] - b[2]));
      s_[i] = s;
      q_[i] = b[0] * (0.5 - s) + b[3] * u_[i] + b[4];
      sum += q_[i];
    }
    qmean_ = sum / static_cast<double>(q_.size());
    last_ = b;
    cached_ = true;
  }

  double pcc() {
    double sqh = 0.0;
    sqq_ = 0.0;
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double d = q_[i] - qmean_;
      sqq_ += d * d;
      sqh += d * h_[i];
    }
    if (!(sqq_ > 0.0) || !std::isfinite(sqq_)) return -1.0;
    return sqh / std::sqrt(sqq_ * shh_);
  }

  std::vector<double> u_;
  std::vector<double> h_;
  std::vector<double> q_;
  std::vector<double> s_;
  double shh_ = 0.0;
  double sqq_ = 0.0;
  double qmean_ = 0.0;
  Params last_{};
  bool cached_ = false;
};

// splitmix64; uniform doubles built from the top 53 bits so the stream is
// identical on every standard library.
class SplitMix {
 public:
  explicit SplitMix(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

Params ascend(PccObjective& f, Params b, int iterations, double step) {
  Params grad{};
  b = f.project(b);
  double current = f.gradient(b, grad);
  for (int it = 0; it < iterations; ++it) {
    bool improved = false;
    while (step > 1e-12) {
      Params trial = b;
      for (std::size_t k = 0; k < 5; ++k) trial[k] += step * grad[k];
      const double v = f.value(trial);
      if (v > current) {
        b = f.project(trial);
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    current = f.gradient(b, grad);
    step *= 2.0;
  }
  return b;
}

// Coarse scan of slope and centre (centres at data quantiles) on the
// projected objective. Steep curves have narrow basins in the centre that the
// randomized starts can miss.
Params scan_slope_and_centre(PccObjective& f) {
  std::vector<double> sorted = f.inputs();
  std::sort(sorted.begin(), sorted.end());
  Params best{0.0, 0.0, 0.0, 1.0, 0.0};
  double best_value = f.value(best);
  for (double slope : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
    for (int k = 1; k < 32; ++k) {
      const double centre = sorted[(sorted.size() - 1) * static_cast<std::size_t>(k) / 32];
      const Params p = f.project({0.0, slope, centre, 0.0, 0.0});
      const double v = f.value(p);
      if (v > best_value) {
        best_value = v;
        best = p;
      }
    }
  }
  return best;
}

LogisticParams to_raw(const Params& b, double mu, double sigma) {
  LogisticParams p;
  p.a1 = b[0];
  p.a2 = b[1] / sigma;
  p.a3 = mu + b[2] * sigma;
  p.a4 = b[3] / sigma;
  p.a5 = b[4] - b[3] * mu / sigma;
  return p;
}

double pcc_of(const LogisticParams& p, std::span<const float> metric, std::span<const float> human) {
  std::vector<double> q(metric.size());
  std::vector<double> h(human.begin(), human.end());
  for (std::size_t i = 0; i < metric.size(); ++i) q[i] = logistic(metric[i], p);
  return pearson(std::span<const double>(q), std::span<const double>(h)).value;
}

// Rescales q so that a * q + b is the least-squares fit of the human values;
// PCC is unchanged because the scale is positive.
LogisticParams calibrate_scale(const LogisticParams& p, std::span<const float> metric, std::span<const float> human) {
  const double n = static_cast<double>(metric.size());
  double mq = 0.0;
  double mh = 0.0;
  std::vector<double> q(metric.size());
  for (std::size_t i = 0; i < metric.size(); ++i) {
    q[i] = logistic(metric[i], p);
    mq += q[i];
    mh += human[i];
  }
  mq /= n;
  mh /= n;
  double sqq = 0.0;
  double sqh = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    sqq += (q[i] - mq) * (q[i] - mq);
    sqh += (q[i] - mq) * (human[i] - mh);
  }
  if (!(sqq > 0.0)) return p;
  const double scale = sqh / sqq;
  if (!(scale > 0.0) || !std::isfinite(scale)) return p;
  LogisticParams out = p;
  out.a1 *= scale;
  out.a4 *= scale;
  out.a5 = scale * (p.a5 - mq) + mh;
  return out;
}

}  // namespace

LogisticFit fit_logistic_pcc(std::span<const float> metric, std::span<const float> human, const FitOptions& options) {
  if (metric.size() != human.size()) throw ShapeError("fit_logistic_pcc: inputs differ in length");
  LogisticFit fit;
  const Correlation raw = pearson(metric, human);
  fit.pcc_raw = raw.value;
  if (raw.degenerate) {
    fit.params = LogisticParams::identity();
    fit.pcc = 0.0;
    fit.degenerate = true;
    return fit;
  }

  const std::size_t stride = std::max<std::size_t>(1, (metric.size() + options.max_fit_samples - 1) /
                                                          std::max<std::size_t>(options.max_fit_samples, 1));
  std::vector<double> xs;
  std::vector<double> hs;
  for (std::size_t i = 0; i < metric.size(); i += stride) {
    xs.push_back(metric[i]);
    hs.push_back(human[i]);
  }
  const double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mu) * (x - mu);
  const double sigma = std::sqrt(var / static_cast<double>(xs.size()));
  double hvar = 0.0;
  const double hmu = std::accumulate(hs.begin(), hs.end(), 0.0) / static_cast<double>(hs.size());
  for (double h : hs) hvar += (h - hmu) * (h - hmu);
  if (!(sigma > 0.0) || !(hvar > 0.0)) {
    // The subsample lost all variation; the identity is the safe answer.
    fit.params = LogisticParams::identity();
    fit.pcc = raw.value;
    return fit;
  }
  std::vector<double> us(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) us[i] = (xs[i] - mu) / sigma;
  PccObjective objective(std::move(us), std::move(hs));

  std::vector<Params> starts = {{0.0, 0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, -1.0, 0.0}};
  SplitMix rng(options.seed);
  while (static_cast<int>(starts.size()) < options.starts) {
    const double sign = rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0;
    starts.push_back({sign * rng.uniform(0.5, 2.0), rng.uniform(0.5, 8.0), rng.uniform(-2.0, 2.0),
                      rng.uniform(-0.5, 0.5), 0.0});
  }
  starts.resize(static_cast<std::size_t>(std::max(options.starts, 2)));
  starts.push_back(scan_slope_and_centre(objective));

  Params best = starts.front();
  double best_value = objective.value(best);
  for (const Params& start : starts) {
    const Params b = ascend(objective, start, options.iterations, options.step);
    const double v = objective.value(b);
    if (v > best_value) {
      best_value = v;
      best = b;
    }
  }

  LogisticParams params = to_raw(best, mu, sigma);
  double pcc = pcc_of(params, metric, human);
  if (!(pcc >= raw.value) || !std::isfinite(pcc)) {
    params = LogisticParams::identity();
    pcc = raw.value;
  }
  fit.params = calibrate_scale(params, metric, human);
  fit.pcc = pcc;
  return fit;
}

LogisticFit fit_logistic_pcc(const Tensor& metric_map, const Tensor& human_map, const FitOptions& options) {
  if (metric_map.shape() != human_map.shape()) throw ShapeError("fit_logistic_pcc: map shapes differ");
  return fit_logistic_pcc(metric_map.values(), human_map.values(), options);
}

FitScope parse_fit_scope(const std::string& name) {
  if (name == "sample") return FitScope::kPerSample;
  if (name == "scene") return FitScope::kPerScene;
  if (name == "global") return FitScope::kGlobal;
  throw ArgumentError("unknown fit scope '" + name + "' (expected sample, scene or global)");
}

// ---------------------------------------------------------------------------
// Protocol

namespace {

std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / n)};
}

}  // namespace

CorrelationReport evaluate(const std::vector<HumanMaskSet>& annotations, const MapLookup& lookup,
                           const EvalOptions& options) {
  CorrelationReport report;
  const std::size_t n = annotations.size();
  std::vector<std::optional<Tensor>> maps(n);
  for (std::size_t i = 0; i < n; ++i) {
    const HumanMaskSet& a = annotations[i];
    std::optional<Tensor> m = lookup(a.scene, a.sample);
    if (!m) {
      report.missing.push_back(a.scene + "/" + a.sample);
      continue;
    }
    if (m->rank() != 2) throw ShapeError("metric map for " + a.scene + "/" + a.sample + " is not [H,W]");
    maps[i] = bilinear_resize(*m, a.mean_map.dim(0), a.mean_map.dim(1));
  }

  // Shared fits for the pooled scopes, keyed by scene ("" for global).
  std::map<std::string, LogisticParams> pooled;
  if (options.scope != FitScope::kPerSample) {
    std::map<std::string, std::pair<std::vector<float>, std::vector<float>>> groups;
    for (std::size_t i = 0; i < n; ++i) {
      if (!maps[i]) continue;
      const std::string key = options.scope == FitScope::kPerScene ? annotations[i].scene : std::string{};
      auto& [xs, hs] = groups[key];
      xs.insert(xs.end(), maps[i]->values().begin(), maps[i]->values().end());
      hs.insert(hs.end(), annotations[i].mean_map.values().begin(), annotations[i].mean_map.values().end());
    }
    for (auto& [key, data] : groups) {
      FitOptions fo = options.fit;
      fo.seed = options.fit.seed ^ fnv1a(key);
      pooled[key] = fit_logistic_pcc(data.first, data.second, fo).params;
    }
  }

  std::vector<SampleResult> results(n);
  parallel_for(n, [&](std::size_t i) {
    if (!maps[i]) return;
    const HumanMaskSet& a = annotations[i];
    const Tensor& metric = *maps[i];
    SampleResult& r = results[i];
    r.scene = a.scene;
    r.sample = a.sample;
    const Correlation raw = pearson(metric.values(), a.mean_map.values());
    r.pcc_raw = raw.value;
    const Correlation rank = spearman(metric, a.mean_map);
    r.srcc = rank.value;
    if (options.scope == FitScope::kPerSample) {
      FitOptions fo = options.fit;
      fo.seed = options.fit.seed ^ fnv1a(a.scene + "/" + a.sample);
      const LogisticFit fit = fit_logistic_pcc(metric, a.mean_map, fo);
      r.pcc_fit = fit.pcc;
      r.params = fit.params;
      r.degenerate = fit.degenerate || rank.degenerate;
    } else {
      const std::string key = options.scope == FitScope::kPerScene ? a.scene : std::string{};
      r.params = pooled.at(key);
      std::vector<double> q(metric.size());
      for (std::size_t k = 0; k < metric.size(); ++k) q[k] = logistic(metric[k], r.params);
      std::vector<double> h(a.mean_map.values().begin(), a.mean_map.values().end());
      const Correlation c = pearson(std::span<const double>(q), std::span<const double>(h));
      r.pcc_fit = c.value;
      r.degenerate = c.degenerate || rank.degenerate;
    }
  });

  std::map<std::string, bool> scene_complete;
  for (std::size_t i = 0; i < n; ++i) {
    auto [it, inserted] = scene_complete.emplace(annotations[i].scene, true);
    if (!maps[i]) it->second = false;
  }
  std::map<std::string, std::vector<const SampleResult*>> by_scene;
  for (std::size_t i = 0; i < n; ++i) {
    if (maps[i]) {
      report.samples.push_back(results[i]);
    }
  }
  for (const SampleResult& r : report.samples) by_scene[r.scene].push_back(&r);
  std::vector<double> scene_pcc;
  std::vector<double> scene_srcc;
  for (const auto& [scene, complete] : scene_complete) {
    if (!complete) {
      report.excluded_scenes.push_back(scene);
      continue;
    }
    SceneResult s;
    s.scene = scene;
    for (const SampleResult* r : by_scene[scene]) {
      s.pcc += r->pcc_fit;
      s.srcc += r->srcc;
    }
    s.samples = by_scene[scene].size();
    s.pcc /= static_cast<double>(s.samples);
    s.srcc /= static_cast<double>(s.samples);
    scene_pcc.push_back(s.pcc);
    scene_srcc.push_back(s.srcc);
    report.scenes.push_back(s);
  }
  std::tie(report.pcc_mean, report.pcc_std) = mean_std(scene_pcc);
  std::tie(report.srcc_mean, report.srcc_std) = mean_std(scene_srcc);
  return report;
}

CorrelationReport evaluate(const fs::path& maps_dir, const fs::path& annotations_root, const EvalOptions& options) {
  if (!fs::is_directory(maps_dir)) throw IoError("map directory " + maps_dir.string() + " is not a directory");
  const std::vector<HumanMaskSet> annotations = ingest_annotations(annotations_root);
  MapLookup lookup = [&](const std::string& scene, const std::string& sample) -> std::optional<Tensor> {
    const fs::path p = maps_dir / scene / (sample + ".pzsm");
    if (!fs::is_regular_file(p)) return std::nullopt;
    return read_sidecar(p);
  };
  return evaluate(annotations, lookup, options);
}

std::string report_csv(const CorrelationReport& report) {
  std::string out = "scene,sample,pcc_raw,pcc_fit,srcc,a1,a2,a3,a4,a5\n";
  char buf[512];
  for (const SampleResult& r : report.samples) {
    std::snprintf(buf, sizeof buf, "%s,%s,%.6f,%.6f,%.6f,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.scene.c_str(),
                  r.sample.c_str(), r.pcc_raw, r.pcc_fit, r.srcc, r.params.a1, r.params.a2, r.params.a3, r.params.a4,
                  r.params.a5);
    out += buf;
  }
  return out;
}

std::string report_table(const CorrelationReport& report) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-20s %8s %8s %8s\n", "scene", "samples", "PCC", "SRCC");
  os << buf;
  for (const SceneResult& s : report.scenes) {
    std::snprintf(buf, sizeof buf, "%-20s %8zu %8.3f %8.3f\n", s.scene.c_str(), s.samples, s.pcc, s.srcc);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-20s %8zu %8.3f %8.3f\n", "mean", report.scenes.size(), report.pcc_mean,
                report.srcc_mean);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-20s %8s %8.3f %8.3f\n", "std", "", report.pcc_std, report.srcc_std);
  os << buf;
  for (const std::string& m : report.missing) os << "missing map: " << m << '\n';
  for (const std::string& s : report.excluded_scenes) os << "excluded scene: " << s << '\n';
  return os.str();
}

}  // namespace puzzlesim
