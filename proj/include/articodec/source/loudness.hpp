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

#include <cmath>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"

namespace articodec::source {

// Mean absolute amplitude over non-overlapping 320-sample bins (a stride-320
// convolution with a constant 1/320 kernel). floor(len / 320) frames.
inline std::vector<float> compute_loudness(const Waveform& wave) {
  if (wave.sample_rate != kInternalRate) {
    throw data_error("loudness expects 16 kHz audio, got " + std::to_string(wave.sample_rate));
  }
  if (wave.size() < static_cast<std::size_t>(kHopSamples)) {
    throw data_error("clip too short for loudness: " + std::to_string(wave.size()) + " samples, need 320");
  }
  const std::size_t frames = wave.size() / kHopSamples;
  std::vector<float> out(frames);
  for (std::size_t t = 0; t < frames; ++t) {
    double acc = 0;
    const float* x = wave.samples.data() + t * kHopSamples;
    for (int i = 0; i < kHopSamples; ++i) acc += std::abs(x[i]);
    out[t] = static_cast<float>(acc / kHopSamples);
  }
  return out;
}

}  // namespace articodec::source
