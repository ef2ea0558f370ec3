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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "articodec/nn/ops.hpp"

namespace articodec::nn {

template <std::floating_point T>
using NamedParams = std::vector<std::pair<std::string, Var<T>>>;

using Rng = std::mt19937_64;

// U(-1/sqrt(fan_in), 1/sqrt(fan_in)), the common default for conv/linear.
template <std::floating_point T>
Tensor<T> fan_in_uniform(Shape shape, int fan_in, Rng& rng) {
  Tensor<T> t(std::move(shape));
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max(fan_in, 1)));
  std::uniform_real_distribution<double> u(-bound, bound);
  for (auto& v : t.data) v = static_cast<T>(u(rng));
  return t;
}

template <std::floating_point T>
struct Linear {
  Var<T> weight;  // [out, in]
  Var<T> bias;    // [out]

  Linear() = default;
  Linear(int in, int out, Rng& rng)
      : weight(Var<T>::parameter(fan_in_uniform<T>({out, in}, in, rng))),
        bias(Var<T>::parameter(fan_in_uniform<T>({out}, in, rng))) {}

  int in_features() const { return weight.dim(1); }
  int out_features() const { return weight.dim(0); }

  Var<T> operator()(const Var<T>& x) const { return linear(x, weight, bias); }

  void collect(const std::string& prefix, NamedParams<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

template <std::floating_point T>
struct Conv1d {
  Var<T> weight;  // [out, in / groups, kernel]
  Var<T> bias;    // [out]
  Conv1dSpec spec;

  Conv1d() = default;
  Conv1d(int in, int out, int kernel, Conv1dSpec s, Rng& rng) : spec(s) {
    const int fan_in = in / s.groups * kernel;
    weight = Var<T>::parameter(fan_in_uniform<T>({out, in / s.groups, kernel}, fan_in, rng));
    bias = Var<T>::parameter(fan_in_uniform<T>({out}, fan_in, rng));
  }

  int kernel() const { return weight.dim(2); }
  Var<T> operator()(const Var<T>& x) const { return conv1d(x, weight, bias, spec); }

  void collect(const std::string& prefix, NamedParams<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

// Upsampling by `stride` with the output cropped to exactly L * stride.
template <std::floating_point T>
struct ConvTranspose1d {
  Var<T> weight;  // [in, out, kernel]
  Var<T> bias;
  int stride = 1;
  int padding = 0;

  ConvTranspose1d() = default;
  ConvTranspose1d(int in, int out, int kernel, int s, Rng& rng)
      : stride(s), padding((kernel - s) / 2) {
    const int fan_in = out * kernel;
    weight = Var<T>::parameter(fan_in_uniform<T>({in, out, kernel}, fan_in, rng));
    bias = Var<T>::parameter(fan_in_uniform<T>({out}, fan_in, rng));
  }

  Var<T> operator()(const Var<T>& x) const {
    return conv_transpose1d(x, weight, bias, stride, padding, x.dim(2) * stride);
  }

  void collect(const std::string& prefix, NamedParams<T>& out) const {
    out.emplace_back(prefix + ".weight", weight);
    out.emplace_back(prefix + ".bias", bias);
  }
};

template <std::floating_point T>
void zero_grads(const NamedParams<T>& params) {
  for (const auto& [name, p] : params) {
    auto v = p;
    v.zero_grad();
  }
}

template <std::floating_point T>
void set_requires_grad(const NamedParams<T>& params, bool on) {
  for (const auto& [name, p] : params) {
    auto v = p;
    v.set_requires_grad(on);
  }
}

template <std::floating_point T>
std::size_t parameter_count(const NamedParams<T>& params) {
  std::size_t n = 0;
  for (const auto& [name, p] : params) n += p.size();
  return n;
}

}  // namespace articodec::nn
