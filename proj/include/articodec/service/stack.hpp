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

#include <filesystem>
#include <memory>
#include <string>

#include "articodec/analysis/encoder.hpp"
#include "articodec/analysis/linear_map.hpp"
#include "articodec/core/digest.hpp"
#include "articodec/core/resample.hpp"
#include "articodec/core/types.hpp"
#include "articodec/source/features.hpp"
#include "articodec/speaker/encoder.hpp"
#include "articodec/vocoder/synthesize.hpp"
#include "articodec/vocoder/trainer.hpp"

namespace articodec::service {

struct EncodeResult {
  ArticulatoryFeatures features;
  SpeakerEmbedding embedding;
};

// Everything needed to encode and decode: frozen encoder, linear AAI head,
// pitch tracker, and the trained generator with its speaker FFN. Immutable
// once built.
class CodecStack {
 public:
  CodecStack(std::shared_ptr<const analysis::SslEncoder> encoder, analysis::LinearMap aai,
             std::shared_ptr<const source::PitchTracker> tracker, std::shared_ptr<const vocoder::VocoderModel> model)
      : encoder_(std::move(encoder)), aai_(std::move(aai)), tracker_(std::move(tracker)), model_(std::move(model)) {
    if (!encoder_ || !tracker_ || !model_) throw usage_error("codec stack is missing a component");
    aai_.validate();
    if (aai_.encoder_id != encoder_->id()) {
      throw usage_error("AAI map was fit on encoder '" + aai_.encoder_id + "' but the stack uses '" + encoder_->id() +
                        "'");
    }
    if (aai_.dim() != encoder_->dim()) throw usage_error("AAI map dimension does not match the encoder");
    if (aai_.source_layer >= encoder_->num_layers()) throw usage_error("AAI map layer is outside the encoder");
    if (model_->config.speaker_input_dim != encoder_->frontend_dim()) {
      throw usage_error("speaker FFN input (" + std::to_string(model_->config.speaker_input_dim) +
                        ") does not match the encoder front-end (" + std::to_string(encoder_->frontend_dim()) + ")");
    }
    hash_ = sha256_hex(model_->config_hash() + "|" + encoder_->id() + "|" + tracker_->id() + "|" +
                       sha256_hex(analysis::encode_linear_map(aai_)));
  }

  const std::string& config_hash() const { return hash_; }
  const analysis::SslEncoder& encoder() const { return *encoder_; }
  const analysis::LinearMap& aai() const { return aai_; }
  const source::PitchTracker& tracker() const { return *tracker_; }
  const vocoder::VocoderModel& model() const { return *model_; }

  // 16 kHz mono, any supported ingest rate accepted.
  static Waveform to_internal(const Waveform& wave) {
    validate_ingest(wave);
    if (wave.empty()) throw data_error("empty waveform");
    return wave.sample_rate == kInternalRate ? wave : resample(wave, kInternalRate);
  }

  // Articulation: SSL layer -> linear map -> 10 Hz low-pass.
  EmaTrace articulation(const Waveform& w16) const {
    const auto stack = analysis::extract_ssl_features(w16, *encoder_, {aai_.source_layer});
    return analysis::predict_ema(aai_, stack.layers.front());
  }

  // Full analysis; `source_mode` only changes voicing of the f0 stream (train
  // mode keeps f0 on every frame). All streams share the shortest length.
  EncodeResult encode(const Waveform& wave, Mode source_mode = Mode::kInference) const {
    const auto w = to_internal(wave);
    auto ema = articulation(w);
    const auto src = source::extract_source(w, *tracker_, source_mode);
    const auto n = std::min<std::size_t>(static_cast<std::size_t>(ema.frames()), src.frames());
    EncodeResult r;
    r.features.ema.rate = kFeatureRate;
    r.features.ema.values = ema.values.leftCols(static_cast<Eigen::Index>(n));
    r.features.source = src;
    r.features.source.f0.resize(n);
    r.features.source.periodicity.resize(n);
    r.features.source.loudness.resize(n);
    r.embedding = speaker::encode_speaker(w, src.periodicity, model_->speaker_ffn, *encoder_, Mode::kInference);
    return r;
  }

  SpeakerEmbedding speaker_template(const std::vector<Waveform>& clips, int k = 10) const {
    std::vector<Waveform> w16;
    for (const auto& c : clips) w16.push_back(to_internal(c));
    return speaker::make_template(w16, model_->speaker_ffn, *encoder_, *tracker_, k);
  }

  Waveform synthesize(const ArticulatoryFeatures& f, const SpeakerEmbedding& spk) const {
    return vocoder::synthesize(f, spk, model_->generator);
  }

 private:
  std::shared_ptr<const analysis::SslEncoder> encoder_;
  analysis::LinearMap aai_;
  std::shared_ptr<const source::PitchTracker> tracker_;
  std::shared_ptr<const vocoder::VocoderModel> model_;
  std::string hash_;
};

struct StackPaths {
  std::filesystem::path checkpoint;  // .ackp
  std::filesystem::path aai_map;     // .aaiw
  std::string encoder_asset;
  std::string tracker_id = "nccf-viterbi";
};

inline std::shared_ptr<const CodecStack> load_codec_stack(const StackPaths& p) {
  if (!std::filesystem::exists(p.checkpoint)) {
    throw missing_asset("vocoder checkpoint not found: " + p.checkpoint.string());
  }
  if (!std::filesystem::exists(p.aai_map)) throw missing_asset("AAI map not found: " + p.aai_map.string());
  auto map = analysis::read_linear_map(p.aai_map);
  auto encoder = analysis::make_encoder(map.encoder_id, p.encoder_asset);
  auto model = std::make_shared<const vocoder::VocoderModel>(
      vocoder::model_from_checkpoint(vocoder::load_checkpoint(p.checkpoint)));
  return std::make_shared<const CodecStack>(std::move(encoder), std::move(map), source::make_pitch_tracker(p.tracker_id),
                                            std::move(model));
}

// Untrained stand-in assets so the pipeline can run end to end before any
// EMA corpus or training is available: a random AAI head for `encoder` and an
// initialized vocoder. Output audio is not speech.
struct PlaceholderAssets {
  analysis::LinearMap aai;
  vocoder::Checkpoint checkpoint;
};

inline PlaceholderAssets make_placeholder_assets(const analysis::SslEncoder& encoder, vocoder::VocoderConfig cfg,
                                                 int layer = -1, std::uint64_t seed = 7) {
  if (layer < 0) layer = std::min(9, encoder.num_layers() - 1);
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f / std::sqrt(static_cast<float>(encoder.dim())));
  PlaceholderAssets a;
  a.aai.weights.resize(encoder.dim(), kEmaChannels);
  for (Eigen::Index i = 0; i < a.aai.weights.size(); ++i) a.aai.weights.data()[i] = n(rng);
  a.aai.bias = Eigen::VectorXf::Zero(kEmaChannels);
  a.aai.source_layer = layer;
  a.aai.encoder_id = encoder.id();
  cfg.speaker_input_dim = encoder.frontend_dim();
  const vocoder::VocoderModel model(cfg);
  a.checkpoint.config_hash = model.config_hash();
  a.checkpoint.config_dump = model.config.dump();
  a.checkpoint.add(model.generator_params());
  a.checkpoint.add(model.discriminator_params());
  return a;
}

inline std::shared_ptr<const CodecStack> make_placeholder_stack(const std::string& encoder_id, vocoder::VocoderConfig cfg,
                                                                std::uint64_t seed = 7) {
  auto encoder = analysis::make_encoder(encoder_id);
  auto assets = make_placeholder_assets(*encoder, std::move(cfg), -1, seed);
  auto model = std::make_shared<const vocoder::VocoderModel>(vocoder::model_from_checkpoint(assets.checkpoint));
  return std::make_shared<const CodecStack>(std::move(encoder), std::move(assets.aai),
                                            source::make_pitch_tracker(), std::move(model));
}

}  // namespace articodec::service
