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

#include <optional>

#include "articodec/control/manipulate.hpp"
#include "articodec/core/log.hpp"
#include "articodec/service/stack.hpp"

namespace articodec::control {

struct Conversion {
  Waveform audio;
  ArticulatoryFeatures features;  // what was fed to the generator
};

// Encode the source, optionally move its pitch into the target range, and
// decode with the target speaker embedding. Articulation passes through.
inline Conversion convert_voice(const Waveform& source_wave, const SpeakerEmbedding& target,
                                const std::optional<PitchStats>& target_pitch, const service::CodecStack& stack,
                                bool p_rescale = true) {
  if (source_wave.duration() < 2.0) {
    warn("voice conversion on a clip shorter than 2 s; speaker and pitch statistics may be unreliable");
  }
  auto enc = stack.encode(source_wave);
  Conversion out;
  out.features = std::move(enc.features);
  if (p_rescale) {
    if (!target_pitch) throw usage_error("pitch rescaling needs target pitch statistics");
    out.features.source = rescale_pitch(out.features.source, target_pitch->mean, target_pitch->std);
  }
  out.audio = stack.synthesize(out.features, target);
  return out;
}

}  // namespace articodec::control
