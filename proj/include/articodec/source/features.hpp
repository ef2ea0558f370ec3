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

#include "articodec/core/resample.hpp"
#include "articodec/core/signal.hpp"
#include "articodec/core/types.hpp"
#include "articodec/source/loudness.hpp"
#include "articodec/source/pitch.hpp"

namespace articodec::source {

// 16 kHz, z-scored within the utterance.
inline Waveform prepare_source_input(const Waveform& wave) {
  Waveform w = wave.sample_rate == kInternalRate ? wave : resample(wave, kInternalRate);
  w.samples = zscore(w.samples);
  return w;
}

// Pitch, periodicity and loudness at 50 Hz, truncated to a common length.
inline SourceFeatures extract_source(const Waveform& wave, const PitchTracker& tracker, Mode mode) {
  const auto w = prepare_source_input(wave);
  auto pitch = track_pitch(w, tracker, mode);
  auto loud = compute_loudness(w);
  const std::size_t n = std::min(pitch.f0.size(), loud.size());
  SourceFeatures s;
  s.f0.assign(pitch.f0.begin(), pitch.f0.begin() + n);
  s.periodicity.assign(pitch.periodicity.begin(), pitch.periodicity.begin() + n);
  s.loudness.assign(loud.begin(), loud.begin() + n);
  s.rate = kFeatureRate;
  return s;
}

}  // namespace articodec::source
