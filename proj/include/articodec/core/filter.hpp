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
#include <array>
#include <cmath>
#include <complex>
#include <concepts>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"

namespace articodec {

// One biquad: b0 b1 b2 / 1 a1 a2 (a0 normalized to 1).
struct Biquad {
  double b0, b1, b2;
  double a1, a2;
};

using SosFilter = std::vector<Biquad>;

// Digital Butterworth low-pass as second-order sections. Analog prototype
// with prewarped cutoff, mapped through the bilinear transform; the overall
// gain sits in the first section.
inline SosFilter butterworth_lowpass(int order, double cutoff_hz,
                                     double rate_hz) {
  if (order < 1) throw usage_error("filter order must be >= 1");
  if (!(cutoff_hz > 0.0) || !(cutoff_hz < rate_hz / 2.0)) {
    throw usage_error("cutoff must lie in (0, rate/2)");
  }
  using C = std::complex<double>;
  const double fs2 = 4.0;  // bilinear constant for a design rate of 2
  const double wn = cutoff_hz / (rate_hz / 2.0);
  const double warped = fs2 * std::tan(std::numbers::pi * wn / 2.0);

  std::vector<C> poles;
  for (int m = -order + 1; m < order; m += 2) {
    poles.push_back(-std::exp(C(0.0, std::numbers::pi * m / (2.0 * order))) *
                    warped);
  }
  C denom = 1.0;
  for (const auto& p : poles) denom *= (fs2 - p);
  double gain = std::pow(warped, order) / denom.real();

  SosFilter sos;
  for (const auto& p : poles) {
    const C z = (fs2 + p) / (fs2 - p);
    if (p.imag() > 1e-12) {
      sos.push_back({1.0, 2.0, 1.0, -2.0 * z.real(), std::norm(z)});
    } else if (std::abs(p.imag()) <= 1e-12) {
      sos.push_back({1.0, 1.0, 0.0, -z.real(), 0.0});
    }
  }
  // Real section last, matching the usual pairing.
  std::stable_partition(sos.begin(), sos.end(),
                        [](const Biquad& s) { return s.a2 != 0.0; });
  sos.front().b0 *= gain;
  sos.front().b1 *= gain;
  sos.front().b2 *= gain;
  return sos;
}

namespace detail {

// Steady-state transposed direct-form II state for a unit step input.
inline std::vector<std::array<double, 2>> sos_step_state(const SosFilter& sos) {
  std::vector<std::array<double, 2>> zi(sos.size());
  double scale = 1.0;
  for (std::size_t i = 0; i < sos.size(); ++i) {
    const auto& s = sos[i];
    // (I - A^T) z = B with the companion matrix of [1, a1, a2].
    const double m00 = 1.0 + s.a1, m01 = -1.0, m10 = s.a2, m11 = 1.0;
    const double r0 = s.b1 - s.a1 * s.b0, r1 = s.b2 - s.a2 * s.b0;
    const double det = m00 * m11 - m01 * m10;
    zi[i] = {scale * (r0 * m11 - m01 * r1) / det,
             scale * (m00 * r1 - m10 * r0) / det};
    scale *= (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  }
  return zi;
}

inline void sos_run(const SosFilter& sos, std::vector<double>& x,
                    std::vector<std::array<double, 2>> z) {
  for (double& v : x) {
    double in = v;
    for (std::size_t i = 0; i < sos.size(); ++i) {
      const auto& s = sos[i];
      const double y = s.b0 * in + z[i][0];
      z[i][0] = s.b1 * in - s.a1 * y + z[i][1];
      z[i][1] = s.b2 * in - s.a2 * y;
      in = y;
    }
    v = in;
  }
}

}  // namespace detail

// Edge padding used by the forward-backward filter; inputs must be longer.
inline std::size_t filtfilt_padlen(const SosFilter& sos) {
  std::size_t zero_b2 = 0, zero_a2 = 0;
  for (const auto& s : sos) {
    zero_b2 += s.b2 == 0.0;
    zero_a2 += s.a2 == 0.0;
  }
  return 3 * (2 * sos.size() + 1 - std::min(zero_b2, zero_a2));
}

// Zero-phase forward-backward filtering with odd extension at both ends
// and steady-state initial conditions.
template <std::floating_point T>
std::vector<T> filtfilt(const SosFilter& sos, std::span<const T> x) {
  const std::size_t pad = filtfilt_padlen(sos);
  if (x.size() <= pad) {
    warn("series of length " + std::to_string(x.size()) +
         " is shorter than the filter warm-up (" + std::to_string(pad + 1) +
         "), returning it unfiltered");
    return std::vector<T>(x.begin(), x.end());
  }
  const std::size_t n = x.size();
  std::vector<double> ext(n + 2 * pad);
  for (std::size_t i = 0; i < pad; ++i) {
    ext[i] = 2.0 * x[0] - x[pad - i];
    ext[pad + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  for (std::size_t i = 0; i < n; ++i) ext[pad + i] = x[i];

  const auto zi = detail::sos_step_state(sos);
  auto scaled = [&](double x0) {
    auto z = zi;
    for (auto& s : z) {
      s[0] *= x0;
      s[1] *= x0;
    }
    return z;
  };
  detail::sos_run(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());
  detail::sos_run(sos, ext, scaled(ext.front()));
  std::reverse(ext.begin(), ext.end());

  std::vector<T> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<T>(ext[pad + i]);
  return out;
}

struct LowpassOptions {
  double cutoff_hz = 10.0;
  double rate_hz = 50.0;
  int order = 5;
};

// Zero-phase low-pass used on 50 Hz articulatory traces.
template <std::floating_point T>
std::vector<T> lowpass(std::span<const T> series,
                       const LowpassOptions& opt = {}) {
  const auto sos = butterworth_lowpass(opt.order, opt.cutoff_hz, opt.rate_hz);
  return filtfilt(sos, series);
}

template <std::floating_point T>
std::vector<T> lowpass(const std::vector<T>& series,
                       const LowpassOptions& opt = {}) {
  return lowpass(std::span<const T>(series), opt);
}

// Row-wise low-pass of a channels x frames matrix.
template <typename Derived>
void lowpass_rows_inplace(Eigen::MatrixBase<Derived>& m,
                          const LowpassOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  const auto sos = butterworth_lowpass(opt.order, opt.cutoff_hz, opt.rate_hz);
  if (static_cast<std::size_t>(m.cols()) <= filtfilt_padlen(sos)) {
    warn("trace of " + std::to_string(m.cols()) +
         " frames is shorter than the filter warm-up, left unfiltered");
    return;
  }
  std::vector<Scalar> row(m.cols());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    const auto y = filtfilt(sos, std::span<const Scalar>(row));
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = y[c];
  }
}

}  // namespace articodec
