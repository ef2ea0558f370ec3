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

#include "articodec/core/error.hpp"
#include "articodec/nn/ops.hpp"
#include "articodec/vocoder/config.hpp"
#include "articodec/vocoder/discriminator.hpp"
#include "articodec/vocoder/mel.hpp"

namespace articodec::vocoder {

// Weighted components as they enter the total.
template <std::floating_point T>
struct GeneratorLoss {
  nn::Var<T> total;
  double adversarial = 0;
  double mel = 0;
  double feature_match = 0;
};

template <std::floating_point T>
struct DiscriminatorLoss {
  nn::Var<T> total;
  double real = 0;
  double fake = 0;
};

namespace detail {

inline void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw data_error(std::string("non-finite ") + what + " loss (" + std::to_string(v) +
                     "); aborting step");
  }
}

template <std::floating_point T>
nn::Var<T> sum_terms(const std::vector<nn::Var<T>>& terms) {
  nn::Var<T> acc = terms.at(0);
  for (std::size_t i = 1; i < terms.size(); ++i) acc = nn::add(acc, terms[i]);
  return acc;
}

}  // namespace detail

// mean |mel(real) - mel(fake)|, unweighted.
template <std::floating_point T>
nn::Var<T> mel_l1(const LogMel<T>& mel, const nn::Var<T>& real, const nn::Var<T>& fake) {
  if (real.shape() != fake.shape()) {
    throw usage_error("mel loss: length mismatch " + nn::shape_str(real.shape()) + " vs " +
                      nn::shape_str(fake.shape()));
  }
  return nn::l1(mel(real), mel(fake));
}

// Least-squares GAN generator objective with mel and feature-matching terms.
template <std::floating_point T>
GeneratorLoss<T> generator_loss(const nn::Var<T>& real, const nn::Var<T>& fake,
                                const std::vector<DiscOutput<T>>& d_real,
                                const std::vector<DiscOutput<T>>& d_fake, const LogMel<T>& mel,
                                const LossWeights& w) {
  if (d_real.size() != d_fake.size()) throw usage_error("generator loss: discriminator count mismatch");
  std::vector<nn::Var<T>> adv, fm;
  for (std::size_t i = 0; i < d_fake.size(); ++i) {
    adv.push_back(nn::mse_to(d_fake[i].score, T(1)));
    const auto& fr = d_real[i].features;
    const auto& ff = d_fake[i].features;
    for (std::size_t l = 0; l < ff.size(); ++l) fm.push_back(nn::l1(fr[l].detach(), ff[l]));
  }
  GeneratorLoss<T> out;
  const auto adv_sum = detail::sum_terms(adv);
  const auto fm_sum = detail::sum_terms(fm);
  const auto mel_term = mel_l1(mel, real.detach(), fake);
  out.adversarial = w.gan * adv_sum.item();
  out.mel = w.mel * mel_term.item();
  out.feature_match = w.feature_match * fm_sum.item();
  detail::check_finite(out.adversarial, "adversarial");
  detail::check_finite(out.mel, "mel");
  detail::check_finite(out.feature_match, "feature-matching");
  out.total = nn::weighted_sum<T>({adv_sum, mel_term, fm_sum},
                                  {static_cast<T>(w.gan), static_cast<T>(w.mel),
                                   static_cast<T>(w.feature_match)});
  return out;
}

// sum over discriminators of mean((1 - D(real))^2) + mean(D(fake)^2).
template <std::floating_point T>
DiscriminatorLoss<T> discriminator_loss(const std::vector<DiscOutput<T>>& d_real,
                                        const std::vector<DiscOutput<T>>& d_fake) {
  if (d_real.size() != d_fake.size()) throw usage_error("discriminator loss: count mismatch");
  std::vector<nn::Var<T>> r, f;
  for (std::size_t i = 0; i < d_real.size(); ++i) {
    r.push_back(nn::mse_to(d_real[i].score, T(1)));
    f.push_back(nn::mse_to(d_fake[i].score, T(0)));
  }
  DiscriminatorLoss<T> out;
  const auto rs = detail::sum_terms(r);
  const auto fs = detail::sum_terms(f);
  out.real = rs.item();
  out.fake = fs.item();
  detail::check_finite(out.real, "discriminator real");
  detail::check_finite(out.fake, "discriminator fake");
  out.total = nn::add(rs, fs);
  return out;
}

}  // namespace articodec::vocoder
