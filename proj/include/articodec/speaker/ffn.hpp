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
#include "articodec/nn/layers.hpp"

namespace articodec::speaker {

inline constexpr int kFrontendDim = 1024;

// linear -> GELU -> dropout -> linear, projecting a pooled front-end vector
// to the 64-d speaker embedding. The only trainable part of the encoder.
template <std::floating_point T>
struct SpeakerFfn {
  nn::Linear<T> layer1;
  nn::Linear<T> layer2;
  T dropout_rate = T(0.2);

  SpeakerFfn() = default;
  SpeakerFfn(int in_dim, int hidden, nn::Rng& rng)
      : layer1(in_dim, hidden, rng), layer2(hidden, kSpeakerDim, rng) {}
  explicit SpeakerFfn(nn::Rng& rng) : SpeakerFfn(kFrontendDim, kFrontendDim, rng) {}

  int input_dim() const { return layer1.in_features(); }

  // pooled [B, in_dim] -> [B, 64]
  nn::Var<T> operator()(const nn::Var<T>& pooled, Mode mode, nn::Rng& rng) const {
    if (pooled.dim(1) != input_dim()) {
      throw usage_error("speaker FFN expects " + std::to_string(input_dim()) +
                        "-d pooled features, got " + std::to_string(pooled.dim(1)));
    }
    auto h = nn::gelu(layer1(pooled));
    h = nn::dropout(h, dropout_rate, mode == Mode::kTrain, rng);
    return layer2(h);
  }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const {
    layer1.collect(prefix + ".layer1", out);
    layer2.collect(prefix + ".layer2", out);
  }
};

using SpeakerEncoderParams = SpeakerFfn<float>;

}  // namespace articodec::speaker
