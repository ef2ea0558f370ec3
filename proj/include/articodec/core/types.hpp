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

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "articodec/core/error.hpp"

namespace articodec {

inline constexpr int kInternalRate = 16000;
inline constexpr int kFeatureRate = 50;
inline constexpr int kHopSamples = kInternalRate / kFeatureRate;  // 320
inline constexpr int kEmaChannels = 12;
inline constexpr int kFeatureChannels = 14;
inline constexpr int kSpeakerDim = 64;
inline constexpr double kMinF0 = 50.0;
inline constexpr double kMaxF0 = 550.0;

inline constexpr std::array<int, 5> kIngestRates = {16000, 22050, 24000,
                                                    44100, 48000};

// Order of the 12 midsagittal EMA channels, then the two source channels.
inline constexpr std::array<std::string_view, kFeatureChannels> kChannelNames =
    {"UL_x", "UL_y", "LL_x", "LL_y", "LI_x", "LI_y", "TT_x",
     "TT_y", "TB_x", "TB_y", "TD_x", "TD_y", "f0",   "loudness"};

inline constexpr std::array<std::string_view, 6> kArticulatorNames = {
    "UL", "LL", "LI", "TT", "TB", "TD"};

inline constexpr int kF0Channel = 12;
inline constexpr int kLoudnessChannel = 13;

// Resolves a channel name ("TT_x", "f0", "pitch", "loudness") or an
// articulator name ("TT" selects both axes) to channel indices.
inline std::vector<int> channel_indices(std::string_view name) {
  for (int i = 0; i < kFeatureChannels; ++i) {
    if (kChannelNames[i] == name) return {i};
  }
  if (name == "pitch") return {kF0Channel};
  for (int a = 0; a < 6; ++a) {
    if (kArticulatorNames[a] == name) return {2 * a, 2 * a + 1};
  }
  throw usage_error("unknown channel '" + std::string(name) + "'");
}

struct Waveform {
  std::vector<float> samples;
  int sample_rate = kInternalRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double duration() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

inline bool all_finite(const std::vector<float>& v) {
  return std::all_of(v.begin(), v.end(),
                     [](float x) { return std::isfinite(x); });
}

inline void validate_ingest(const Waveform& w) {
  if (std::find(kIngestRates.begin(), kIngestRates.end(), w.sample_rate) ==
      kIngestRates.end()) {
    throw data_error("unsupported sample rate " +
                     std::to_string(w.sample_rate));
  }
  if (!all_finite(w.samples)) throw data_error("waveform has non-finite samples");
}

using EmaMatrix = Eigen::Matrix<float, kEmaChannels, Eigen::Dynamic>;

// 12 x T articulator trajectories.
struct EmaTrace {
  EmaMatrix values;
  int rate = kFeatureRate;

  Eigen::Index frames() const { return values.cols(); }
};

struct SourceFeatures {
  std::vector<float> f0;           // Hz, 0 marks unvoiced
  std::vector<float> periodicity;  // [0, 1]
  std::vector<float> loudness;     // mean |x| per 20 ms bin
  int rate = kFeatureRate;

  std::size_t frames() const { return f0.size(); }
};

struct ArticulatoryFeatures {
  EmaTrace ema;
  SourceFeatures source;

  std::size_t frames() const { return static_cast<std::size_t>(ema.frames()); }

  // Channel c of the 14-channel view (12 EMA, f0, loudness).
  float channel(int c, std::size_t t) const {
    if (c < kEmaChannels) return ema.values(c, static_cast<Eigen::Index>(t));
    return c == kF0Channel ? source.f0[t] : source.loudness[t];
  }
  float& channel(int c, std::size_t t) {
    if (c < kEmaChannels) return ema.values(c, static_cast<Eigen::Index>(t));
    return c == kF0Channel ? source.f0[t] : source.loudness[t];
  }

  void validate() const {
    const auto t = frames();
    if (ema.rate != kFeatureRate || source.rate != kFeatureRate) {
      throw data_error("articulatory features must be at 50 Hz");
    }
    if (source.f0.size() != t || source.loudness.size() != t ||
        source.periodicity.size() != t) {
      throw data_error("feature streams disagree on frame count");
    }
    if (!ema.values.allFinite() || !all_finite(source.f0) ||
        !all_finite(source.loudness) || !all_finite(source.periodicity)) {
      throw data_error("features contain non-finite values");
    }
  }

  // Keeps the first n frames of every stream.
  void truncate(std::size_t n) {
    n = std::min(n, frames());
    ema.values.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(n));
    source.f0.resize(n);
    source.periodicity.resize(n);
    source.loudness.resize(n);
  }
};

inline bool operator==(const ArticulatoryFeatures& a,
                       const ArticulatoryFeatures& b) {
  return a.ema.rate == b.ema.rate && a.ema.values.cols() == b.ema.values.cols() &&
         a.ema.values == b.ema.values && a.source.f0 == b.source.f0 &&
         a.source.periodicity == b.source.periodicity &&
         a.source.loudness == b.source.loudness;
}

struct SpeakerEmbedding {
  std::array<float, kSpeakerDim> vector{};

  bool finite() const {
    return std::all_of(vector.begin(), vector.end(),
                       [](float x) { return std::isfinite(x); });
  }
  friend bool operator==(const SpeakerEmbedding&,
                         const SpeakerEmbedding&) = default;
};

enum class Mode { kTrain, kInference };

}  // namespace articodec
