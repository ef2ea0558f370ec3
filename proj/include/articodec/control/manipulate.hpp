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
#include <bitset>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/types.hpp"

namespace articodec::control {

using ChannelMask = std::bitset<kFeatureChannels>;

// Comma-separated channel or articulator names; "all" and "ema" are shorthands.
inline ChannelMask parse_channel_mask(std::string_view list) {
  ChannelMask m;
  while (!list.empty()) {
    const auto c = list.find(',');
    const auto name = list.substr(0, c);
    if (name == "all") {
      m.set();
    } else if (name == "ema") {
      for (int i = 0; i < kEmaChannels; ++i) m.set(i);
    } else if (!name.empty()) {
      for (int i : channel_indices(name)) m.set(i);
    }
    if (c == std::string_view::npos) break;
    list = list.substr(c + 1);
  }
  if (m.none()) throw usage_error("empty channel selection");
  return m;
}

// Masked channels become alpha * a + (1 - alpha) * b; the rest (and the
// periodicity stream) come from a. Alpha outside [0, 1] extrapolates.
inline ArticulatoryFeatures interpolate(const ArticulatoryFeatures& a, const ArticulatoryFeatures& b, double alpha,
                                        const ChannelMask& channels) {
  if (a.frames() != b.frames()) throw usage_error("traces must be time-aligned");
  if (!std::isfinite(alpha)) throw usage_error("interpolation alpha must be finite");
  ArticulatoryFeatures out = a;
  const auto al = static_cast<float>(alpha);
  const float be = static_cast<float>(1.0 - alpha);
  for (int c = 0; c < kFeatureChannels; ++c) {
    if (!channels.test(c)) continue;
    for (std::size_t t = 0; t < a.frames(); ++t) out.channel(c, t) = al * a.channel(c, t) + be * b.channel(c, t);
  }
  return out;
}

// Frame pairs (index into a, index into b), one per output frame.
using FrameAlignment = std::vector<std::pair<std::size_t, std::size_t>>;

// Text form: one "i j" pair per line; '#' comments and blank lines ignored.
inline FrameAlignment parse_frame_alignment(std::string_view text) {
  FrameAlignment out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string line(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    long long i = -1, j = -1;
    char extra = 0;
    if (std::sscanf(line.c_str(), "%lld %lld %c", &i, &j, &extra) != 2 || i < 0 || j < 0) {
      throw data_error("alignment line " + std::to_string(line_no) + ": expected two non-negative frame indices");
    }
    out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  if (out.empty()) throw data_error("frame alignment is empty");
  return out;
}

inline ArticulatoryFeatures gather_frames(const ArticulatoryFeatures& f, const std::vector<std::size_t>& idx) {
  ArticulatoryFeatures out;
  out.ema.values.resize(kEmaChannels, static_cast<Eigen::Index>(idx.size()));
  out.source.f0.resize(idx.size());
  out.source.loudness.resize(idx.size());
  out.source.periodicity.resize(idx.size());
  for (std::size_t t = 0; t < idx.size(); ++t) {
    if (idx[t] >= f.frames()) {
      throw data_error("alignment frame " + std::to_string(idx[t]) + " is past the end (" +
                       std::to_string(f.frames()) + " frames)");
    }
    for (int c = 0; c < kFeatureChannels; ++c) out.channel(c, t) = f.channel(c, idx[t]);
    out.source.periodicity[t] = f.source.periodicity[idx[t]];
  }
  return out;
}

// Resamples a and b onto a shared timeline given by the alignment.
inline std::pair<ArticulatoryFeatures, ArticulatoryFeatures> align_frames(const ArticulatoryFeatures& a,
                                                                          const ArticulatoryFeatures& b,
                                                                          const FrameAlignment& alignment) {
  std::vector<std::size_t> ia, ib;
  for (const auto& [i, j] : alignment) ia.push_back(i), ib.push_back(j);
  return {gather_frames(a, ia), gather_frames(b, ib)};
}

// Whole-frame count for a shift in milliseconds (20 ms frames).
inline int shift_frames(double shift_ms) {
  const double frames = shift_ms * kFeatureRate / 1000.0;
  const double r = std::round(frames);
  if (!std::isfinite(shift_ms) || std::abs(frames - r) > 1e-9) {
    throw usage_error("shift must be a multiple of 20 ms (one 50 Hz frame), got " + std::to_string(shift_ms) + " ms");
  }
  return static_cast<int>(r);
}

// Positive shifts delay the channel, negative shifts advance it. Vacated
// frames repeat the boundary value.
inline ArticulatoryFeatures shift_channel(const ArticulatoryFeatures& f, std::string_view channel, double shift_ms) {
  const int k = shift_frames(shift_ms);
  const auto idx = channel_indices(channel);
  ArticulatoryFeatures out = f;
  const auto n = static_cast<long>(f.frames());
  if (k == 0 || n == 0) return out;
  for (int c : idx) {
    for (long t = 0; t < n; ++t) {
      const long src = std::clamp(t - k, 0L, n - 1);
      out.channel(c, static_cast<std::size_t>(t)) = f.channel(c, static_cast<std::size_t>(src));
    }
  }
  return out;
}

struct PitchStats {
  double mean = 0;
  double std = 0;  // population
};

// Mean and std over voiced (f0 > 0) frames.
inline PitchStats voiced_pitch_stats(const std::vector<float>& f0) {
  double sum = 0;
  std::size_t n = 0;
  for (float v : f0) {
    if (v > 0) sum += v, ++n;
  }
  if (n == 0) throw data_error("no voiced frames");
  PitchStats s;
  s.mean = sum / static_cast<double>(n);
  double ss = 0;
  for (float v : f0) {
    if (v > 0) ss += (v - s.mean) * (v - s.mean);
  }
  s.std = std::sqrt(ss / static_cast<double>(n));
  return s;
}

// Voiced f0 mapped to the target range before clamping (unvoiced stay 0).
inline std::vector<double> rescaled_f0_unclamped(const std::vector<float>& f0, double target_mean,
                                                 double target_std) {
  if (!std::isfinite(target_mean) || !std::isfinite(target_std) || target_std < 0) {
    throw usage_error("target pitch statistics must be finite with std >= 0");
  }
  const auto voiced = std::count_if(f0.begin(), f0.end(), [](float v) { return v > 0; });
  if (voiced == 0) throw data_error("pitch rescaling needs voiced frames, found none");
  if (voiced < 2) throw data_error("pitch rescaling needs at least 2 voiced frames");
  const auto s = voiced_pitch_stats(f0);
  std::vector<double> out(f0.size(), 0.0);
  if (target_mean == s.mean && target_std == s.std) {
    for (std::size_t t = 0; t < f0.size(); ++t) out[t] = f0[t] > 0 ? f0[t] : 0.0;
    return out;
  }
  if (s.std == 0.0) {
    warn("pitch rescaling: voiced f0 is constant, mapping every voiced frame to the target mean");
  }
  for (std::size_t t = 0; t < f0.size(); ++t) {
    if (f0[t] <= 0) continue;
    out[t] = s.std == 0.0 ? target_mean : (f0[t] - s.mean) / s.std * target_std + target_mean;
  }
  return out;
}

// z-score voiced f0, then shift and scale to the target; clamped to
// [50, 550] Hz. Loudness and periodicity are untouched.
inline SourceFeatures rescale_pitch(const SourceFeatures& src, double target_mean, double target_std) {
  const auto r = rescaled_f0_unclamped(src.f0, target_mean, target_std);
  SourceFeatures out = src;
  for (std::size_t t = 0; t < r.size(); ++t) {
    out.f0[t] = src.f0[t] > 0 ? static_cast<float>(std::clamp(r[t], kMinF0, kMaxF0)) : 0.0f;
  }
  return out;
}

}  // namespace articodec::control
