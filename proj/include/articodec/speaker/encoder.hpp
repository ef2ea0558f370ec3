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
#include <span>
#include <string>
#include <vector>

#include "articodec/analysis/encoder.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/resample.hpp"
#include "articodec/core/types.hpp"
#include "articodec/nn/autograd.hpp"
#include "articodec/source/features.hpp"
#include "articodec/speaker/ffn.hpp"

namespace articodec::speaker {

// Frozen front-end output (the features right before the transformer),
// T x frontend_dim at 50 Hz.
inline analysis::FeatureMatrix acoustic_frame_features(const Waveform& wave, const analysis::SslEncoder& encoder) {
  const Waveform w = wave.sample_rate == kInternalRate ? wave : resample(wave, kInternalRate);
  auto f = encoder.frontend(w);
  if (!f.allFinite()) throw data_error("speaker front-end produced non-finite features");
  return f;
}

// sum_t w_t f_t / sum_t w_t over the rows of `features`. All-zero weights
// fall back to a plain mean.
inline Eigen::VectorXf weighted_pool(const analysis::FeatureMatrix& features, std::span<const float> weights) {
  if (features.rows() == 0) throw data_error("cannot pool an empty feature sequence");
  if (static_cast<Eigen::Index>(weights.size()) != features.rows()) {
    throw usage_error("pooling weights (" + std::to_string(weights.size()) + ") do not match frames (" +
                      std::to_string(features.rows()) + ")");
  }
  double total = 0;
  for (float w : weights) {
    if (!(w >= 0.0f) || !std::isfinite(w)) throw data_error("pooling weights must be finite and nonnegative");
    total += w;
  }
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(features.cols());
  if (total == 0.0) {
    warn("speaker pooling: all periodicity weights are zero, using uniform weights");
    for (Eigen::Index t = 0; t < features.rows(); ++t) acc += features.row(t).transpose().cast<double>();
    return (acc / static_cast<double>(features.rows())).cast<float>();
  }
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    if (weights[t] != 0.0f) acc += static_cast<double>(weights[t]) * features.row(t).transpose().cast<double>();
  }
  return (acc / total).cast<float>();
}

// Pooled front-end vector for one utterance; frames and periodicity are
// truncated to their common length.
inline Eigen::VectorXf pooled_frontend(const Waveform& wave, std::span<const float> periodicity,
                                       const analysis::SslEncoder& encoder) {
  auto f = acoustic_frame_features(wave, encoder);
  const auto n = std::min<Eigen::Index>(f.rows(), static_cast<Eigen::Index>(periodicity.size()));
  if (n == 0) throw data_error("no frames to pool for the speaker embedding");
  return weighted_pool(f.topRows(n), periodicity.first(static_cast<std::size_t>(n)));
}

inline SpeakerEmbedding project_speaker(const Eigen::VectorXf& pooled, const SpeakerEncoderParams& ffn, Mode mode,
                                        nn::Rng& rng) {
  nn::NoGradGuard guard;
  const nn::Var<float> in(nn::Tensor<float>({1, static_cast<int>(pooled.size())},
                                            std::vector<float>(pooled.data(), pooled.data() + pooled.size())));
  const auto out = ffn(in, mode, rng);
  SpeakerEmbedding e;
  std::copy(out.data().begin(), out.data().end(), e.vector.begin());
  if (!e.finite()) throw data_error("speaker embedding is not finite");
  return e;
}

// Pool -> FFN. Dropout is active only in train mode.
inline SpeakerEmbedding encode_speaker(const Waveform& wave, std::span<const float> periodicity,
                                       const SpeakerEncoderParams& ffn, const analysis::SslEncoder& encoder,
                                       Mode mode = Mode::kInference, std::uint64_t seed = 0) {
  nn::Rng rng(seed);
  return project_speaker(pooled_frontend(wave, periodicity, encoder), ffn, mode, rng);
}

// Speaker template: the first min(k, n) clips concatenated in order and
// encoded once in eval mode.
inline SpeakerEmbedding make_template(const std::vector<Waveform>& clips, const SpeakerEncoderParams& ffn,
                                      const analysis::SslEncoder& encoder, const source::PitchTracker& tracker,
                                      int k = 10) {
  if (clips.empty()) throw usage_error("speaker template needs at least one clip");
  if (k < 1) throw usage_error("template clip count k must be positive");
  Waveform joined;
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(k), clips.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Waveform w = clips[i].sample_rate == kInternalRate ? clips[i] : resample(clips[i], kInternalRate);
    joined.samples.insert(joined.samples.end(), w.samples.begin(), w.samples.end());
  }
  const auto src = source::extract_source(joined, tracker, Mode::kInference);
  return encode_speaker(joined, src.periodicity, ffn, encoder, Mode::kInference);
}

}  // namespace articodec::speaker
