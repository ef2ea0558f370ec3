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
#include <vector>

#include "articodec/core/types.hpp"
#include "articodec/nn/layers.hpp"
#include "articodec/vocoder/config.hpp"

namespace articodec::vocoder {

// Speaker-conditioned per-channel affine: linear -> ReLU -> dropout ->
// linear giving [scale | center] for `channels` channels.
template <std::floating_point T>
struct Film {
  nn::Linear<T> hidden;
  nn::Linear<T> out;
  int channels = 0;

  Film() = default;
  Film(int speaker_dim, int hidden_dim, int ch, nn::Rng& rng)
      : hidden(speaker_dim, hidden_dim, rng), out(hidden_dim, 2 * ch, rng), channels(ch) {
    // Start near identity: scale bias 1, center bias 0.
    auto& b = out.bias.mutable_value().data;
    for (int c = 0; c < ch; ++c) {
      b[c] = T(1);
      b[ch + c] = T(0);
    }
  }

  // Returns {scale, center}, each [B, C].
  std::pair<nn::Var<T>, nn::Var<T>> params(const nn::Var<T>& spk, T dropout_p, bool training,
                                           nn::Rng& rng) const {
    auto h = nn::relu(hidden(spk));
    h = nn::dropout(h, dropout_p, training, rng);
    const auto sc = out(h);
    return {nn::slice_features(sc, 0, channels), nn::slice_features(sc, channels, 2 * channels)};
  }

  nn::Var<T> operator()(const nn::Var<T>& x, const nn::Var<T>& spk, T dropout_p, bool training,
                        nn::Rng& rng) const {
    if (x.dim(1) != channels) {
      throw usage_error("FiLM: expected " + std::to_string(channels) + " channels, got " +
                        std::to_string(x.dim(1)));
    }
    const auto [scale, center] = params(spk, dropout_p, training, rng);
    return nn::channel_affine(x, scale, center);
  }

  void collect(const std::string& prefix, nn::NamedParams<T>& out_params) const {
    hidden.collect(prefix + ".hidden", out_params);
    out.collect(prefix + ".out", out_params);
  }
};

// Residual block: per dilation, lrelu -> dilated conv -> FiLM -> lrelu ->
// conv -> FiLM, added back to the input.
template <std::floating_point T>
struct ResBlock {
  std::vector<nn::Conv1d<T>> convs1, convs2;
  std::vector<Film<T>> films1, films2;

  ResBlock() = default;
  ResBlock(int ch, int kernel, const std::vector<int>& dilations, const GeneratorConfig& cfg,
           nn::Rng& rng) {
    for (int d : dilations) {
      convs1.emplace_back(ch, ch, kernel, nn::Conv1dSpec::same(kernel, d), rng);
      films1.emplace_back(cfg.speaker_dim, cfg.film_hidden, ch, rng);
      convs2.emplace_back(ch, ch, kernel, nn::Conv1dSpec::same(kernel, 1), rng);
      films2.emplace_back(cfg.speaker_dim, cfg.film_hidden, ch, rng);
    }
  }

  nn::Var<T> operator()(nn::Var<T> x, const nn::Var<T>& spk, T slope, T drop, bool training,
                        nn::Rng& rng) const {
    for (std::size_t i = 0; i < convs1.size(); ++i) {
      auto h = nn::leaky_relu(x, slope);
      h = films1[i](convs1[i](h), spk, drop, training, rng);
      h = nn::leaky_relu(h, slope);
      h = films2[i](convs2[i](h), spk, drop, training, rng);
      x = nn::add(h, x);
    }
    return x;
  }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const {
    for (std::size_t i = 0; i < convs1.size(); ++i) {
      const std::string p = prefix + "." + std::to_string(i);
      convs1[i].collect(p + ".conv1", out);
      films1[i].collect(p + ".film1", out);
      convs2[i].collect(p + ".conv2", out);
      films2[i].collect(p + ".film2", out);
    }
  }
};

template <std::floating_point T>
class Generator {
 public:
  Generator() = default;
  explicit Generator(const GeneratorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    nn::Rng rng(cfg_.seed);
    conv_pre_ = nn::Conv1d<T>(cfg_.input_channels, cfg_.channels(0), cfg_.pre_kernel,
                              nn::Conv1dSpec::same(cfg_.pre_kernel), rng);
    for (std::size_t i = 0; i < cfg_.upsample_kernels.size(); ++i) {
      const int cin = cfg_.channels(static_cast<int>(i));
      const int cout = cfg_.channels(static_cast<int>(i) + 1);
      ups_.emplace_back(cin, cout, cfg_.upsample_kernels[i], cfg_.upsample_strides[i], rng);
      std::vector<ResBlock<T>> mrf;
      for (int k : cfg_.mrf_kernels) mrf.emplace_back(cout, k, cfg_.mrf_dilations, cfg_, rng);
      mrfs_.push_back(std::move(mrf));
    }
    conv_post_ = nn::Conv1d<T>(cfg_.channels(static_cast<int>(ups_.size())), 1, cfg_.post_kernel,
                               nn::Conv1dSpec::same(cfg_.post_kernel), rng);
  }

  const GeneratorConfig& config() const { return cfg_; }

  // features [B, 14, T], spk [B, speaker_dim] -> [B, 1, T * hop]
  nn::Var<T> operator()(const nn::Var<T>& features, const nn::Var<T>& spk, Mode mode,
                        nn::Rng& rng) const {
    if (features.shape().size() != 3 || features.dim(1) != cfg_.input_channels) {
      throw data_error("generator expects " + std::to_string(cfg_.input_channels) +
                       " feature channels, got shape " + nn::shape_str(features.shape()));
    }
    if (spk.shape() != nn::Shape{features.dim(0), cfg_.speaker_dim}) {
      throw data_error("generator expects speaker embedding of shape [" +
                       std::to_string(features.dim(0)) + ", " + std::to_string(cfg_.speaker_dim) +
                       "], got " + nn::shape_str(spk.shape()));
    }
    const bool training = mode == Mode::kTrain;
    const T slope = static_cast<T>(cfg_.leaky_slope);
    const T drop = static_cast<T>(cfg_.film_dropout);
    auto x = nn::repeat_time(features, cfg_.pre_upsample_repeat);
    x = conv_pre_(x);
    for (std::size_t i = 0; i < ups_.size(); ++i) {
      x = ups_[i](nn::leaky_relu(x, slope));
      nn::Var<T> sum;
      for (const auto& block : mrfs_[i]) {
        auto y = block(x, spk, slope, drop, training, rng);
        sum = sum.defined() ? nn::add(sum, y) : y;
      }
      x = sum;
    }
    x = conv_post_(nn::leaky_relu(x, T(0.01)));
    return nn::tanh(x);
  }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const {
    conv_pre_.collect(prefix + ".conv_pre", out);
    for (std::size_t i = 0; i < ups_.size(); ++i) {
      const std::string p = prefix + ".stage" + std::to_string(i);
      ups_[i].collect(p + ".up", out);
      for (std::size_t j = 0; j < mrfs_[i].size(); ++j) {
        mrfs_[i][j].collect(p + ".mrf" + std::to_string(j), out);
      }
    }
    conv_post_.collect(prefix + ".conv_post", out);
  }

  nn::NamedParams<T> parameters(const std::string& prefix = "gen") const {
    nn::NamedParams<T> out;
    collect(prefix, out);
    return out;
  }

 private:
  GeneratorConfig cfg_;
  nn::Conv1d<T> conv_pre_;
  std::vector<nn::ConvTranspose1d<T>> ups_;
  std::vector<std::vector<ResBlock<T>>> mrfs_;
  nn::Conv1d<T> conv_post_;
};

// Frame-major features to a [1, 14, T] generator input: EMA as is, f0
// scaled by f0_scale, loudness raw.
template <std::floating_point T>
nn::Tensor<T> features_to_tensor(const ArticulatoryFeatures& f, const GeneratorConfig& cfg,
                                 int begin = 0, int count = -1) {
  const int frames = static_cast<int>(f.frames());
  if (count < 0) count = frames - begin;
  if (begin < 0 || begin + count > frames) throw usage_error("feature window out of range");
  nn::Tensor<T> t({1, kFeatureChannels, count});
  for (int c = 0; c < kFeatureChannels; ++c) {
    const double s = c == kF0Channel ? cfg.f0_scale : 1.0;
    for (int i = 0; i < count; ++i) {
      t.data[static_cast<std::size_t>(c) * count + i] = static_cast<T>(s * f.channel(c, static_cast<std::size_t>(begin + i)));
    }
  }
  return t;
}

}  // namespace articodec::vocoder
