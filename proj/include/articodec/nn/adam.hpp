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
#include <string>
#include <vector>

#include "articodec/nn/layers.hpp"

namespace articodec::nn {

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.5;
  double beta2 = 0.9;
  double eps = 1e-8;
};

// Adam over a fixed parameter list. Only the parameters it was built with
// are ever written.
template <std::floating_point T>
class Adam {
 public:
  Adam(NamedParams<T> params, AdamOptions opt) : params_(std::move(params)), opt_(opt) {
    for (const auto& [name, p] : params_) {
      m_.emplace_back(p.size(), T(0));
      v_.emplace_back(p.size(), T(0));
    }
  }

  void set_lr(double lr) { opt_.lr = lr; }
  double lr() const { return opt_.lr; }
  long long steps() const { return t_; }

  void zero_grad() { zero_grads(params_); }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
    const T b1 = static_cast<T>(opt_.beta1), b2 = static_cast<T>(opt_.beta2);
    const T step_size = static_cast<T>(opt_.lr / bc1);
    const T inv_bc2 = static_cast<T>(1.0 / bc2);
    const T eps = static_cast<T>(opt_.eps);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto p = params_[i].second;
      const auto& g = p.grad_or_empty();
      if (g.empty()) continue;
      auto& w = p.mutable_value().data;
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = b1 * m[j] + (T(1) - b1) * g[j];
        v[j] = b2 * v[j] + (T(1) - b2) * g[j] * g[j];
        w[j] -= step_size * m[j] / (std::sqrt(v[j] * inv_bc2) + eps);
      }
    }
  }

  // Moment buffers for checkpointing, named after their parameters.
  NamedParams<T> state() const {
    NamedParams<T> out;
    for (std::size_t i = 0; i < params_.size(); ++i) {
      const auto& [name, p] = params_[i];
      out.emplace_back(name + ".adam_m", Var<T>(Tensor<T>(p.shape(), m_[i])));
      out.emplace_back(name + ".adam_v", Var<T>(Tensor<T>(p.shape(), v_[i])));
    }
    return out;
  }

  void load_state(const std::vector<std::vector<T>>& m,
                  const std::vector<std::vector<T>>& v, long long t) {
    if (m.size() != m_.size() || v.size() != v_.size()) {
      throw data_error("optimizer state does not match parameter list");
    }
    for (std::size_t i = 0; i < m_.size(); ++i) {
      if (m[i].size() != m_[i].size() || v[i].size() != v_[i].size()) {
        throw data_error("optimizer state shape mismatch for " + params_[i].first);
      }
    }
    m_ = m;
    v_ = v;
    t_ = t;
  }

  const NamedParams<T>& params() const { return params_; }

 private:
  NamedParams<T> params_;
  AdamOptions opt_;
  std::vector<std::vector<T>> m_, v_;
  long long t_ = 0;
};

}  // namespace articodec::nn
