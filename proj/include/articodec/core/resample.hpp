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
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"

namespace articodec {

struct ResampleOptions {
  int zero_crossings = 24;  // sinc lobes on each side at the cutoff
  double rolloff = 0.95;    // fraction of the lower Nyquist kept
  double kaiser_beta = 8.6;
};

namespace detail {

inline double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

}  // namespace detail

// Band-limited rational resampling with a Kaiser-windowed sinc kernel,
// evaluated through a polyphase table. Output length is
// ceil(len * target / source).
inline Waveform resample(const Waveform& wave, int target_rate,
                         const ResampleOptions& opt = {}) {
  if (target_rate <= 0) throw usage_error("target rate must be positive");
  if (wave.empty()) throw data_error("empty waveform");
  if (wave.sample_rate <= 0) throw data_error("invalid source sample rate");
  if (wave.sample_rate == target_rate) return wave;

  const std::int64_t g = std::gcd(wave.sample_rate, target_rate);
  const std::int64_t up = target_rate / g;
  const std::int64_t down = wave.sample_rate / g;
  const double fc =
      opt.rolloff * std::min(1.0, static_cast<double>(up) / down);
  const double half_width = opt.zero_crossings / fc;
  const int taps_half = static_cast<int>(std::ceil(half_width));
  const int taps = 2 * taps_half;
  const double i0_beta = std::cyl_bessel_i(0.0, opt.kaiser_beta);

  // table[p * taps + j] weights input sample n0 - taps_half + 1 + j for an
  // output whose fractional input position is p / up.
  std::vector<double> table(static_cast<std::size_t>(up * taps));
  for (std::int64_t p = 0; p < up; ++p) {
    const double frac = static_cast<double>(p) / up;
    for (int j = 0; j < taps; ++j) {
      const double delta = frac + taps_half - 1 - j;
      const double u = delta / half_width;
      double w = 0.0;
      if (std::abs(u) <= 1.0) {
        w = std::cyl_bessel_i(0.0, opt.kaiser_beta * std::sqrt(1.0 - u * u)) /
            i0_beta;
      }
      table[p * taps + j] = fc * detail::sinc(fc * delta) * w;
    }
  }

  const auto n_in = static_cast<std::int64_t>(wave.size());
  const std::int64_t n_out = (n_in * up + down - 1) / down;
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(static_cast<std::size_t>(n_out));
  for (std::int64_t m = 0; m < n_out; ++m) {
    const std::int64_t pos = m * down;
    const std::int64_t n0 = pos / up;
    const std::int64_t phase = pos % up;
    const double* h = &table[phase * taps];
    double acc = 0.0;
    const std::int64_t first = n0 - taps_half + 1;
    for (int j = 0; j < taps; ++j) {
      const std::int64_t k = first + j;
      if (k < 0 || k >= n_in) continue;
      acc += h[j] * wave.samples[k];
    }
    out.samples[m] = static_cast<float>(acc);
  }
  return out;
}

}  // namespace articodec
