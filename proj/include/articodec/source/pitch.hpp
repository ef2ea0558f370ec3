// Copyright (c) 2026 The articodec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"
#include "articodec/nn/fft.hpp"

namespace articodec::source {

inline constexpr int kPitchHop = 80;              // 200 Hz tracker frames
inline constexpr int kPitchDownsample = 4;        // 200 Hz -> 50 Hz
inline constexpr double kVoicingThreshold = 0.4;  // periodicity > 0.4 keeps f0
inline constexpr double kCentsPerBin = 20.0;

// Tracker output at 200 Hz.
struct PitchTrack {
  std::vector<float> f0;           // Hz
  std::vector<float> periodicity;  // [0, 1]
};

// Plug-in contract: 16 kHz wave in, 200 Hz pitch and periodicity out, with
// floor(len / 80) frames (frame i centered on sample 80 i + 40).
class PitchTracker {
 public:
  virtual ~PitchTracker() = default;
  virtual std::string id() const = 0;
  virtual std::size_t window() const = 0;
  virtual PitchTrack track(const Waveform& wave16k) const = 0;
};

// Normalized cross-correlation tracker over 20-cent bins in [50, 550] Hz with
// Viterbi smoothing.
class NccfPitchTracker : public PitchTracker {
 public:
  static constexpr int kWindow = 1024;
  static constexpr int kFft = 2048;

  struct Options {
    double fmin = kMinF0;
    double fmax = kMaxF0;
    double octave_bonus = 0.02;  // per octave above fmin, favours the shortest period
    double jump_cost = 0.02;     // per bin of frame-to-frame change
  };

  NccfPitchTracker() : NccfPitchTracker(Options{}) {}
  explicit NccfPitchTracker(Options opt) : opt_(opt), fft_(kFft) {
    if (!(opt_.fmin > 0 && opt_.fmax > opt_.fmin)) throw usage_error("pitch range must satisfy 0 < fmin < fmax");
    const int n = static_cast<int>(std::floor(1200.0 * std::log2(opt_.fmax / opt_.fmin) / kCentsPerBin)) + 1;
    for (int b = 0; b < n; ++b) bins_.push_back(opt_.fmin * std::pow(2.0, b * kCentsPerBin / 1200.0));
    min_lag_ = static_cast<int>(std::floor(kInternalRate / (bins_.back() * std::pow(2.0, kCentsPerBin / 2400.0))));
    max_lag_ = static_cast<int>(std::ceil(kInternalRate / (opt_.fmin * std::pow(2.0, -kCentsPerBin / 2400.0)))) + 1;
  }

  std::string id() const override { return "nccf-viterbi"; }
  std::size_t window() const override { return kWindow; }
  const std::vector<double>& bins() const { return bins_; }

  PitchTrack track(const Waveform& wave) const override {
    if (wave.sample_rate != kInternalRate) {
      throw data_error("pitch tracker expects 16 kHz audio, got " + std::to_string(wave.sample_rate));
    }
    if (wave.size() < static_cast<std::size_t>(kWindow)) throw data_error("clip too short for pitch tracking");
    const std::size_t frames = wave.size() / kPitchHop;
    const std::size_t nb = bins_.size();
    std::vector<std::vector<float>> score(frames), raw(frames), best_lag(frames);
    std::vector<double> nccf;
    for (std::size_t i = 0; i < frames; ++i) {
      frame_nccf(wave, static_cast<long>(i) * kPitchHop + kPitchHop / 2, nccf);
      score[i].resize(nb);
      raw[i].resize(nb);
      best_lag[i].resize(nb);
      for (std::size_t b = 0; b < nb; ++b) {
        const auto [r, lag] = bin_peak(nccf, b);
        raw[i][b] = static_cast<float>(r);
        best_lag[i][b] = static_cast<float>(lag);
        score[i][b] = static_cast<float>(r + opt_.octave_bonus * std::log2(bins_[b] / opt_.fmin));
      }
    }
    const auto path = viterbi(score);
    PitchTrack out;
    out.f0.resize(frames);
    out.periodicity.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
      const auto b = path[i];
      const double f = kInternalRate / static_cast<double>(best_lag[i][b]);
      out.f0[i] = static_cast<float>(std::clamp(f, opt_.fmin, opt_.fmax));
      out.periodicity[i] = std::clamp(raw[i][b], 0.0f, 1.0f);
    }
    return out;
  }

 private:
  // nccf[lag] for lag in [0, max_lag_] of the window centered at `center`.
  void frame_nccf(const Waveform& wave, long center, std::vector<double>& nccf) const {
    std::vector<double> x(kFft, 0.0);
    const long start = center - kWindow / 2;
    const long n = static_cast<long>(wave.size());
    for (int j = 0; j < kWindow; ++j) {
      const long k = start + j;
      if (k >= 0 && k < n) x[j] = wave.samples[k];
    }
    std::vector<std::complex<double>> spec(kFft / 2 + 1);
    fft_.forward(x.data(), spec.data());
    for (auto& s : spec) s = std::norm(s);
    std::vector<double> ac(kFft);
    fft_.inverse_real(spec.data(), ac.data());
    std::vector<double> prefix(kWindow + 1, 0.0);
    for (int j = 0; j < kWindow; ++j) prefix[j + 1] = prefix[j] + x[j] * x[j];
    nccf.assign(max_lag_ + 2, 0.0);
    const double floor = 1e-8 * prefix[kWindow] + 1e-12;
    for (int lag = 1; lag <= max_lag_ + 1 && lag < kWindow; ++lag) {
      const double e0 = prefix[kWindow - lag];
      const double e1 = prefix[kWindow] - prefix[lag];
      const double den = std::sqrt(e0 * e1);
      nccf[lag] = den > floor ? ac[lag] / kFft / den : 0.0;
    }
  }

  double interp(const std::vector<double>& nccf, double lag) const {
    const int l = static_cast<int>(std::floor(lag));
    const double a = lag - l;
    return (1 - a) * nccf[l] + a * nccf[l + 1];
  }

  // Largest correlation inside bin b's lag interval and where it occurs.
  std::pair<double, double> bin_peak(const std::vector<double>& nccf, std::size_t b) const {
    const double center = kInternalRate / bins_[b];
    const double half = std::pow(2.0, kCentsPerBin / 2400.0);
    const double lo = center / half, hi = center * half;
    double best = interp(nccf, center), where = center;
    for (double lag : {lo, hi}) {
      const double v = interp(nccf, lag);
      if (v > best) best = v, where = lag;
    }
    for (int lag = static_cast<int>(std::ceil(lo)); lag <= static_cast<int>(std::floor(hi)); ++lag) {
      if (nccf[lag] > best) best = nccf[lag], where = lag;
    }
    // Parabolic refinement around an integer-lag maximum.
    const int l = static_cast<int>(std::lround(where));
    if (std::abs(where - l) < 1e-9 && l > 1 && l + 1 < static_cast<int>(nccf.size())) {
      const double ym = nccf[l - 1], y0 = nccf[l], yp = nccf[l + 1];
      const double den = ym - 2 * y0 + yp;
      if (den < 0) {
        const double d = std::clamp(0.5 * (ym - yp) / den, -0.5, 0.5);
        const double refined = std::clamp(l + d, lo, hi);
        where = refined;
      }
    }
    return {best, where};
  }

  // Max-sum path with an L1 jump penalty, via a two-pass distance transform.
  std::vector<std::size_t> viterbi(const std::vector<std::vector<float>>& score) const {
    const std::size_t t = score.size(), nb = bins_.size();
    std::vector<std::vector<std::uint16_t>> back(t, std::vector<std::uint16_t>(nb));
    std::vector<double> acc(score[0].begin(), score[0].end()), next(nb);
    std::vector<std::uint16_t> arg(nb);
    const double c = opt_.jump_cost;
    for (std::size_t i = 1; i < t; ++i) {
      std::vector<double> best(acc);
      for (std::size_t b = 0; b < nb; ++b) arg[b] = static_cast<std::uint16_t>(b);
      for (std::size_t b = 1; b < nb; ++b) {
        if (best[b - 1] - c > best[b]) best[b] = best[b - 1] - c, arg[b] = arg[b - 1];
      }
      for (std::size_t b = nb - 1; b-- > 0;) {
        if (best[b + 1] - c > best[b]) best[b] = best[b + 1] - c, arg[b] = arg[b + 1];
      }
      for (std::size_t b = 0; b < nb; ++b) {
        next[b] = best[b] + score[i][b];
        back[i][b] = arg[b];
      }
      acc.swap(next);
    }
    std::vector<std::size_t> path(t);
    path[t - 1] = static_cast<std::size_t>(std::max_element(acc.begin(), acc.end()) - acc.begin());
    for (std::size_t i = t - 1; i > 0; --i) path[i - 1] = back[i][path[i]];
    return path;
  }

  Options opt_;
  nn::RealFft<double> fft_;
  std::vector<double> bins_;
  int min_lag_ = 0, max_lag_ = 0;
};

// 50 Hz f0 and periodicity: block mean of four 200 Hz frames, then (inference
// only) f0 = 0 wherever periodicity <= 0.4.
inline PitchTrack track_pitch(const Waveform& wave16k, const PitchTracker& tracker, Mode mode) {
  if (wave16k.size() < tracker.window()) throw data_error("clip too short for pitch tracking");
  const auto hi = tracker.track(wave16k);
  if (hi.f0.size() != hi.periodicity.size()) throw data_error("pitch tracker returned mismatched series");
  const std::size_t n = hi.f0.size() / kPitchDownsample;
  PitchTrack out;
  out.f0.resize(n);
  out.periodicity.resize(n);
  for (std::size_t t = 0; t < n; ++t) {
    double f = 0, p = 0;
    for (int j = 0; j < kPitchDownsample; ++j) {
      f += hi.f0[t * kPitchDownsample + j];
      p += hi.periodicity[t * kPitchDownsample + j];
    }
    out.f0[t] = static_cast<float>(f / kPitchDownsample);
    out.periodicity[t] = static_cast<float>(p / kPitchDownsample);
    if (mode == Mode::kInference && !(out.periodicity[t] > kVoicingThreshold)) out.f0[t] = 0.0f;
  }
  return out;
}

inline std::shared_ptr<const PitchTracker> make_pitch_tracker(const std::string& id = "nccf-viterbi") {
  if (id == "nccf-viterbi") return std::make_shared<NccfPitchTracker>();
  throw missing_asset("pitch tracker '" + id + "' is not available; the built-in tracker is 'nccf-viterbi'");
}

}  // namespace articodec::source
