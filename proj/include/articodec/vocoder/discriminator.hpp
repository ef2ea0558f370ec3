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

#include <numeric>
#include <string>
#include <vector>

#include "articodec/nn/layers.hpp"
#include "articodec/vocoder/config.hpp"

namespace articodec::vocoder {

// Score map plus the hidden activations used for feature matching.
template <std::floating_point T>
struct DiscOutput {
  nn::Var<T> score;
  std::vector<nn::Var<T>> features;
};

namespace detail {

struct ConvDef {
  int out, kernel, stride, groups, pad;
};

template <std::floating_point T>
struct ConvStack {
  std::vector<nn::Conv1d<T>> convs;
  nn::Conv1d<T> post;

  ConvStack() = default;
  ConvStack(const std::vector<ConvDef>& defs, int post_kernel, const DiscriminatorConfig& cfg,
            nn::Rng& rng) {
    int cin = 1;
    for (const auto& d : defs) {
      const int cout = cfg.width(d.out);
      const int g = std::max(1, std::gcd(std::gcd(cin, cout), d.groups));
      convs.emplace_back(cin, cout, d.kernel, nn::Conv1dSpec{d.stride, 1, d.pad, d.pad, g}, rng);
      cin = cout;
    }
    const int pp = (post_kernel - 1) / 2;
    post = nn::Conv1d<T>(cin, 1, post_kernel, nn::Conv1dSpec{1, 1, pp, pp, 1}, rng);
  }

  DiscOutput<T> operator()(nn::Var<T> x, T slope) const {
    DiscOutput<T> out;
    for (const auto& c : convs) {
      x = nn::leaky_relu(c(x), slope);
      out.features.push_back(x);
    }
    out.score = post(x);
    out.features.push_back(out.score);
    return out;
  }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const {
    for (std::size_t i = 0; i < convs.size(); ++i) convs[i].collect(prefix + ".conv" + std::to_string(i), out);
    post.collect(prefix + ".post", out);
  }
};

}  // namespace detail

// Folds the waveform into `period` interleaved columns and runs a strided
// conv stack along each column.
template <std::floating_point T>
struct PeriodDiscriminator {
  int period = 2;
  detail::ConvStack<T> stack;

  PeriodDiscriminator() = default;
  PeriodDiscriminator(int p, const DiscriminatorConfig& cfg, nn::Rng& rng) : period(p) {
    stack = detail::ConvStack<T>({{32, 5, 3, 1, 2},
                                  {128, 5, 3, 1, 2},
                                  {512, 5, 3, 1, 2},
                                  {1024, 5, 3, 1, 2},
                                  {1024, 5, 1, 1, 2}},
                                 3, cfg, rng);
  }

  // [B, 1, L] -> [B * period, 1, ceil(L / period)] internally.
  nn::Var<T> fold(const nn::Var<T>& x) const {
    const int len = x.dim(2);
    const int rem = len % period;
    auto padded = rem ? nn::reflect_pad_right(x, period - rem) : x;
    return nn::fold_period(padded, period);
  }

  DiscOutput<T> operator()(const nn::Var<T>& x, T slope) const { return stack(fold(x), slope); }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const { stack.collect(prefix, out); }
};

// Average-pools by `scale` (ceil length) and runs a grouped conv stack.
template <std::floating_point T>
struct ScaleDiscriminator {
  int scale = 1;
  detail::ConvStack<T> stack;

  ScaleDiscriminator() = default;
  ScaleDiscriminator(int s, const DiscriminatorConfig& cfg, nn::Rng& rng) : scale(s) {
    stack = detail::ConvStack<T>({{128, 15, 1, 1, 7},
                                  {128, 41, 2, 4, 20},
                                  {256, 41, 2, 16, 20},
                                  {512, 41, 4, 16, 20},
                                  {1024, 41, 4, 16, 20},
                                  {1024, 41, 1, 16, 20},
                                  {1024, 5, 1, 1, 2}},
                                 3, cfg, rng);
  }

  nn::Var<T> pool(const nn::Var<T>& x) const { return nn::avg_pool(x, scale); }

  DiscOutput<T> operator()(const nn::Var<T>& x, T slope) const { return stack(pool(x), slope); }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const { stack.collect(prefix, out); }
};

// All period and scale discriminators; outputs are ordered periods first.
template <std::floating_point T>
class Discriminators {
 public:
  Discriminators() = default;
  explicit Discriminators(const DiscriminatorConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    nn::Rng rng(cfg_.seed);
    for (int p : cfg_.periods) mpd_.emplace_back(p, cfg_, rng);
    for (int s : cfg_.scales) msd_.emplace_back(s, cfg_, rng);
  }

  const DiscriminatorConfig& config() const { return cfg_; }
  std::size_t size() const { return mpd_.size() + msd_.size(); }

  std::vector<DiscOutput<T>> operator()(const nn::Var<T>& wave) const {
    if (wave.shape().size() != 3 || wave.dim(1) != 1) {
      throw usage_error("discriminators expect [B, 1, L] audio, got " + nn::shape_str(wave.shape()));
    }
    const T slope = static_cast<T>(cfg_.leaky_slope);
    std::vector<DiscOutput<T>> out;
    for (const auto& d : mpd_) out.push_back(d(wave, slope));
    for (const auto& d : msd_) out.push_back(d(wave, slope));
    return out;
  }

  const std::vector<PeriodDiscriminator<T>>& periods() const { return mpd_; }
  const std::vector<ScaleDiscriminator<T>>& scales() const { return msd_; }

  void collect(const std::string& prefix, nn::NamedParams<T>& out) const {
    for (const auto& d : mpd_) d.collect(prefix + ".mpd" + std::to_string(d.period), out);
    for (const auto& d : msd_) d.collect(prefix + ".msd" + std::to_string(d.scale), out);
  }

  nn::NamedParams<T> parameters(const std::string& prefix = "disc") const {
    nn::NamedParams<T> out;
    collect(prefix, out);
    return out;
  }

 private:
  DiscriminatorConfig cfg_;
  std::vector<PeriodDiscriminator<T>> mpd_;
  std::vector<ScaleDiscriminator<T>> msd_;
};

}  // namespace articodec::vocoder
