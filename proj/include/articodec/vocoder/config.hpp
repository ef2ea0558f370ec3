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
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"
#include "articodec/vocoder/mel.hpp"

namespace articodec::vocoder {

namespace detail {

inline std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace detail

struct GeneratorConfig {
  std::vector<int> upsample_kernels{10, 8, 4, 4};
  std::vector<int> upsample_strides{5, 4, 2, 2};
  std::vector<int> mrf_kernels{3, 7, 11};
  std::vector<int> mrf_dilations{1, 3, 5};
  int base_channels = 512;
  int input_channels = kFeatureChannels;
  int pre_upsample_repeat = 4;
  int film_hidden = 256;
  int speaker_dim = kSpeakerDim;
  double film_dropout = 0.2;
  int pre_kernel = 7;
  int post_kernel = 7;
  double leaky_slope = 0.1;
  double f0_scale = 0.01;  // f0 enters as f0/100
  unsigned seed = 1234;

  int hop() const {
    int p = pre_upsample_repeat;
    for (int s : upsample_strides) p *= s;
    return p;
  }

  int channels(int stage) const { return std::max(1, base_channels >> stage); }

  void validate() const {
    if (upsample_kernels.size() != upsample_strides.size() || upsample_kernels.empty()) {
      throw usage_error("generator: upsample kernels and strides differ in length");
    }
    for (std::size_t i = 0; i < upsample_kernels.size(); ++i) {
      if (upsample_kernels[i] != 2 * upsample_strides[i]) {
        throw usage_error("generator: each stride must be half its kernel");
      }
    }
    if (hop() * kFeatureRate != kInternalRate) {
      throw usage_error("generator: strides x repeat must map 50 Hz to 16 kHz, got hop " +
                        std::to_string(hop()));
    }
    if (input_channels != kFeatureChannels) throw usage_error("generator: expects 14 input channels");
    if (base_channels < 1 || film_hidden < 1) throw usage_error("generator: channel counts must be positive");
    if (mrf_kernels.empty() || mrf_dilations.empty()) throw usage_error("generator: empty MRF");
  }

  std::string dump() const {
    std::ostringstream os;
    os << "generator.upsample_kernels=" << detail::join(upsample_kernels) << "\n"
       << "generator.upsample_strides=" << detail::join(upsample_strides) << "\n"
       << "generator.mrf_kernels=" << detail::join(mrf_kernels) << "\n"
       << "generator.mrf_dilations=" << detail::join(mrf_dilations) << "\n"
       << "generator.base_channels=" << base_channels << "\n"
       << "generator.input_channels=" << input_channels << "\n"
       << "generator.pre_upsample_repeat=" << pre_upsample_repeat << "\n"
       << "generator.film_hidden=" << film_hidden << "\n"
       << "generator.speaker_dim=" << speaker_dim << "\n"
       << "generator.film_dropout=" << detail::fmt(film_dropout) << "\n"
       << "generator.pre_kernel=" << pre_kernel << "\n"
       << "generator.post_kernel=" << post_kernel << "\n"
       << "generator.leaky_slope=" << detail::fmt(leaky_slope) << "\n"
       << "generator.f0_scale=" << detail::fmt(f0_scale) << "\n"
       << "generator.seed=" << seed << "\n";
    return os.str();
  }

  static GeneratorConfig tiny(int base = 32) {
    GeneratorConfig c;
    c.base_channels = base;
    c.film_hidden = 32;
    return c;
  }
};

struct DiscriminatorConfig {
  std::vector<int> periods{2, 3, 5, 7, 11};
  std::vector<int> scales{1, 2, 4};
  int channel_divisor = 1;  // shrinks every hidden width, for small test runs
  double leaky_slope = 0.1;
  unsigned seed = 4321;

  int width(int c) const { return std::max(1, c / channel_divisor); }

  void validate() const {
    if (channel_divisor < 1) throw usage_error("discriminator: channel_divisor must be >= 1");
    for (int p : periods) {
      if (p < 1) throw usage_error("discriminator: periods must be positive");
    }
    for (int s : scales) {
      if (s < 1) throw usage_error("discriminator: scales must be positive");
    }
  }

  std::string dump() const {
    std::ostringstream os;
    os << "discriminator.periods=" << detail::join(periods) << "\n"
       << "discriminator.scales=" << detail::join(scales) << "\n"
       << "discriminator.channel_divisor=" << channel_divisor << "\n"
       << "discriminator.leaky_slope=" << detail::fmt(leaky_slope) << "\n"
       << "discriminator.seed=" << seed << "\n";
    return os.str();
  }

  static DiscriminatorConfig tiny() {
    DiscriminatorConfig c;
    c.channel_divisor = 16;
    return c;
  }
};

struct LossWeights {
  double gan = 1.0;
  double mel = 45.0;
  double feature_match = 2.0;

  std::string dump() const {
    return "loss.gan=" + detail::fmt(gan) + "\nloss.mel=" + detail::fmt(mel) +
           "\nloss.feature_match=" + detail::fmt(feature_match) + "\n";
  }
};

struct TrainConfig {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  long long total_steps = 1'500'000;
  long long lr_halving_every = 8000;
  long long lr_freeze_after = 320'000;
  int window_ms = 320;
  int batch_size = 64;
  long long checkpoint_every = 10'000;
  long long log_every = 100;
  unsigned seed = 0;

  int window_frames() const { return window_ms * kFeatureRate / 1000; }
  int window_samples() const { return window_frames() * kHopSamples; }

  // lr halves every lr_halving_every steps and stops changing after
  // lr_freeze_after.
  double lr_at(long long step) const {
    const long long s = std::min(std::max(step, 0LL), lr_freeze_after);
    return lr * std::pow(0.5, static_cast<double>(s / lr_halving_every));
  }

  void validate() const {
    if ((window_ms * kFeatureRate) % 1000 != 0 || window_frames() < 1) {
      throw usage_error("train: window_ms must cover a whole number of 20 ms frames");
    }
    if (batch_size < 1) throw usage_error("train: batch_size must be >= 1");
    if (lr <= 0 || lr_halving_every < 1) throw usage_error("train: bad learning-rate schedule");
    if (checkpoint_every < 1) throw usage_error("train: checkpoint_every must be >= 1");
  }

  // Fields that change the optimization trajectory; run length and
  // checkpoint cadence are left out so a resumed run may extend them.
  std::string dump() const {
    std::ostringstream os;
    os << "train.lr=" << detail::fmt(lr) << "\n"
       << "train.beta1=" << detail::fmt(beta1) << "\n"
       << "train.beta2=" << detail::fmt(beta2) << "\n"
       << "train.lr_halving_every=" << lr_halving_every << "\n"
       << "train.lr_freeze_after=" << lr_freeze_after << "\n"
       << "train.window_ms=" << window_ms << "\n"
       << "train.batch_size=" << batch_size << "\n"
       << "train.seed=" << seed << "\n";
    return os.str();
  }
};

inline std::string dump(const MelConfig& m) {
  std::ostringstream os;
  os << "mel.fs=" << m.fs << "\nmel.fft_size=" << m.fft_size << "\nmel.hop_size=" << m.hop_size
     << "\nmel.win_length=" << m.win_length << "\nmel.num_mels=" << m.num_mels
     << "\nmel.fmin=" << detail::fmt(m.fmin) << "\nmel.fmax=" << detail::fmt(m.fmax)
     << "\nmel.clamp_eps=" << detail::fmt(m.clamp_eps)
     << "\nmel.magnitude_eps=" << detail::fmt(m.magnitude_eps) << "\n";
  return os.str();
}

// Everything that defines a vocoder run.
struct VocoderConfig {
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;
  LossWeights loss;
  TrainConfig train;
  MelConfig mel;
  int speaker_input_dim = 1024;
  int speaker_hidden = 1024;

  void validate() const {
    generator.validate();
    discriminator.validate();
    train.validate();
    mel.validate();
    if (speaker_input_dim < 1 || speaker_hidden < 1) throw usage_error("speaker FFN dims must be positive");
  }

  std::string dump() const {
    return generator.dump() + discriminator.dump() + loss.dump() + train.dump() + vocoder::dump(mel) +
           "speaker.input_dim=" + std::to_string(speaker_input_dim) +
           "\nspeaker.hidden=" + std::to_string(speaker_hidden) + "\n";
  }
};

}  // namespace articodec::vocoder
