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
#include <string>
#include <string_view>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/kv_config.hpp"
#include "articodec/vocoder/config.hpp"

namespace articodec::vocoder {

inline ConfigSchema config_schema(VocoderConfig& c) {
  ConfigSchema s;
  auto& g = c.generator;
  s.bind("generator.upsample_kernels", &g.upsample_kernels)
      .bind("generator.upsample_strides", &g.upsample_strides)
      .bind("generator.mrf_kernels", &g.mrf_kernels)
      .bind("generator.mrf_dilations", &g.mrf_dilations)
      .bind("generator.base_channels", &g.base_channels)
      .bind("generator.input_channels", &g.input_channels)
      .bind("generator.pre_upsample_repeat", &g.pre_upsample_repeat)
      .bind("generator.film_hidden", &g.film_hidden)
      .bind("generator.speaker_dim", &g.speaker_dim)
      .bind("generator.film_dropout", &g.film_dropout)
      .bind("generator.pre_kernel", &g.pre_kernel)
      .bind("generator.post_kernel", &g.post_kernel)
      .bind("generator.leaky_slope", &g.leaky_slope)
      .bind("generator.f0_scale", &g.f0_scale)
      .bind("generator.seed", &g.seed);
  auto& d = c.discriminator;
  s.bind("discriminator.periods", &d.periods)
      .bind("discriminator.scales", &d.scales)
      .bind("discriminator.channel_divisor", &d.channel_divisor)
      .bind("discriminator.leaky_slope", &d.leaky_slope)
      .bind("discriminator.seed", &d.seed);
  s.bind("loss.gan", &c.loss.gan).bind("loss.mel", &c.loss.mel).bind("loss.feature_match", &c.loss.feature_match);
  auto& t = c.train;
  s.bind("train.lr", &t.lr)
      .bind("train.beta1", &t.beta1)
      .bind("train.beta2", &t.beta2)
      .bind("train.total_steps", &t.total_steps)
      .bind("train.lr_halving_every", &t.lr_halving_every)
      .bind("train.lr_freeze_after", &t.lr_freeze_after)
      .bind("train.window_ms", &t.window_ms)
      .bind("train.batch_size", &t.batch_size)
      .bind("train.checkpoint_every", &t.checkpoint_every)
      .bind("train.log_every", &t.log_every)
      .bind("train.seed", &t.seed);
  auto& m = c.mel;
  s.bind("mel.fs", &m.fs)
      .bind("mel.fft_size", &m.fft_size)
      .bind("mel.hop_size", &m.hop_size)
      .bind("mel.win_length", &m.win_length)
      .bind("mel.num_mels", &m.num_mels)
      .bind("mel.fmin", &m.fmin)
      .bind("mel.fmax", &m.fmax)
      .bind("mel.clamp_eps", &m.clamp_eps)
      .bind("mel.magnitude_eps", &m.magnitude_eps);
  s.bind("speaker.input_dim", &c.speaker_input_dim).bind("speaker.hidden", &c.speaker_hidden);
  return s;
}

// Small preset for desk-scale runs and tests.
inline VocoderConfig tiny_vocoder_config() {
  VocoderConfig c;
  c.generator = GeneratorConfig::tiny(32);
  c.discriminator = DiscriminatorConfig::tiny();
  c.train.batch_size = 1;
  return c;
}

// Overrides on top of a preset ("default" or "tiny", chosen by an optional
// `preset=` line), validated.
inline VocoderConfig parse_vocoder_config(std::string_view text) {
  auto kv = parse_key_values(text);
  VocoderConfig c;
  if (const auto* p = kv.find("preset")) {
    if (*p == "tiny") {
      c = tiny_vocoder_config();
    } else if (*p != "default") {
      throw usage_error("unknown config preset '" + *p + "' (expected default or tiny)");
    }
    std::erase_if(kv.entries, [](const auto& e) { return e.first == "preset"; });
  }
  config_schema(c).apply(kv);
  c.validate();
  return c;
}

inline VocoderConfig load_vocoder_config(const std::filesystem::path& path) {
  return parse_vocoder_config(read_file(path));
}

}  // namespace articodec::vocoder
