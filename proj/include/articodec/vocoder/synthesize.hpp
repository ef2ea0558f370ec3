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

#include <string>

#include "articodec/core/types.hpp"
#include "articodec/vocoder/generator.hpp"

namespace articodec::vocoder {

// Eval-mode decode of T frames to T * 320 samples at 16 kHz.
inline Waveform synthesize(const ArticulatoryFeatures& features, const SpeakerEmbedding& spk,
                           const Generator<float>& gen) {
  features.validate();
  if (features.frames() == 0) throw data_error("cannot synthesize zero frames");
  if (!spk.finite()) throw data_error("speaker embedding contains non-finite values");
  nn::NoGradGuard guard;
  nn::Rng rng(0);
  const nn::Var<float> x(features_to_tensor<float>(features, gen.config()));
  const nn::Var<float> s(nn::Tensor<float>({1, kSpeakerDim}, std::vector<float>(spk.vector.begin(), spk.vector.end())));
  const auto y = gen(x, s, Mode::kInference, rng);
  return Waveform{y.data(), kInternalRate};
}

}  // namespace articodec::vocoder
