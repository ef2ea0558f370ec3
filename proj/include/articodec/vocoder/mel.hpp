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
#include <cmath>
#include <complex>
#include <concepts>
#include <string>
#include <memory>
#include <numbers>
#include <vector>

#include "articodec/core/types.hpp"
#include "articodec/nn/autograd.hpp"
#include "articodec/nn/fft.hpp"

namespace articodec::vocoder {

struct MelConfig {
  int fs = 16000;
  int fft_size = 1024;
  int hop_size = 160;
  int win_length = 1024;  // window spans the whole FFT
  int num_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double clamp_eps = 1e-5;  // floor applied before the log
  double magnitude_eps = 1e-9;

  void validate() const {
    if (fmax > fs / 2.0) throw usage_error("mel fmax must not exceed fs/2");
    if (win_length != fft_size) throw usage_error("mel window must equal the FFT size");
  }

  int frames(std::size_t len) const {
    if (len < static_cast<std::size_t>(fft_size)) return 0;
    return 1 + static_cast<int>((len - fft_size) / hop_size);
  }
};

// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
inline double hz_to_mel(double hz) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return hz < min_log_hz ? hz / f_sp : min_log_mel + std::log(hz / min_log_hz) / logstep;
}

inline double mel_to_hz(double mel) {
  constexpr double f_sp = 200.0 / 3.0;
  constexpr double min_log_hz = 1000.0;
  constexpr double min_log_mel = min_log_hz / f_sp;
  const double logstep = std::log(6.4) / 27.0;
  return mel < min_log_mel ? mel * f_sp : min_log_hz * std::exp(logstep * (mel - min_log_mel));
}

// num_mels x (fft_size/2 + 1) triangular filters with area normalization.
inline Eigen::MatrixXd mel_filterbank(const MelConfig& cfg) {
  const int bins = cfg.fft_size / 2 + 1;
  std::vector<double> hz(cfg.num_mels + 2);
  const double lo = hz_to_mel(cfg.fmin), hi = hz_to_mel(cfg.fmax);
  for (int i = 0; i < cfg.num_mels + 2; ++i) {
    hz[i] = mel_to_hz(lo + (hi - lo) * i / (cfg.num_mels + 1));
  }
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(cfg.num_mels, bins);
  for (int m = 0; m < cfg.num_mels; ++m) {
    const double enorm = 2.0 / (hz[m + 2] - hz[m]);
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.fs / cfg.fft_size;
      const double lower = (f - hz[m]) / (hz[m + 1] - hz[m]);
      const double upper = (hz[m + 2] - f) / (hz[m + 2] - hz[m + 1]);
      fb(m, k) = std::max(0.0, std::min(lower, upper)) * enorm;
    }
  }
  return fb;
}

// Periodic Hann window.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  return w;
}

// Differentiable log-mel magnitude spectrogram. Frames start at multiples of
// hop_size with no padding: frames = 1 + floor((L - fft) / hop).
// x [B, 1, L] -> [B, num_mels, frames].
template <std::floating_point T>
class LogMel {
 public:
  explicit LogMel(MelConfig cfg = {})
      : cfg_(cfg), fft_(cfg.fft_size) {
    cfg_.validate();
    const auto fb = mel_filterbank(cfg_);
    const auto w = hann_window(cfg_.fft_size);
    auto window = std::make_shared<std::vector<T>>(cfg_.fft_size);
    for (int i = 0; i < cfg_.fft_size; ++i) (*window)[i] = static_cast<T>(w[i]);
    window_ = std::move(window);
    bins_ = static_cast<int>(fb.cols());
    auto filters = std::make_shared<std::vector<Filter>>();
    // Sparse rows: each filter touches a contiguous bin range.
    for (int m = 0; m < cfg_.num_mels; ++m) {
      Filter f;
      for (int k = 0; k < bins_; ++k) {
        if (fb(m, k) > 0.0) {
          if (f.weights.empty()) f.start = k;
          f.weights.push_back(static_cast<T>(fb(m, k)));
        } else if (!f.weights.empty()) {
          break;
        }
      }
      filters->push_back(std::move(f));
    }
    filters_ = std::move(filters);
  }

  const MelConfig& config() const { return cfg_; }

  nn::Var<T> operator()(const nn::Var<T>& x) const {
    const int batch = x.dim(0), len = x.dim(2);
    if (x.dim(1) != 1) throw usage_error("log-mel expects a single channel");
    const int frames = cfg_.frames(static_cast<std::size_t>(len));
    if (frames < 1) {
      throw data_error("clip shorter than one FFT window (" +
                       std::to_string(cfg_.fft_size) + " samples)");
    }
    const int n_fft = cfg_.fft_size, hop = cfg_.hop_size, mels = cfg_.num_mels;
    const auto floor = static_cast<T>(cfg_.clamp_eps);
    const auto meps = static_cast<T>(cfg_.magnitude_eps);

    // Cached per-frame spectra and magnitudes for the backward pass.
    auto spectra = std::make_shared<std::vector<std::complex<T>>>(
        static_cast<std::size_t>(batch) * frames * bins_);
    auto mags = std::make_shared<std::vector<T>>(spectra->size());
    auto mel_lin = std::make_shared<std::vector<T>>(static_cast<std::size_t>(batch) * mels * frames);

    nn::Tensor<T> y({batch, mels, frames});
    std::vector<T> buf(n_fft);
    const auto& window = *window_;
    const auto& filters = *filters_;
    for (int b = 0; b < batch; ++b) {
      const T* xr = &x.data()[static_cast<std::size_t>(b) * len];
      for (int f = 0; f < frames; ++f) {
        for (int i = 0; i < n_fft; ++i) buf[i] = xr[f * hop + i] * window[i];
        auto* spec = &(*spectra)[(static_cast<std::size_t>(b) * frames + f) * bins_];
        auto* mag = &(*mags)[(static_cast<std::size_t>(b) * frames + f) * bins_];
        fft_.forward(buf.data(), spec);
        for (int k = 0; k < bins_; ++k) mag[k] = std::sqrt(std::norm(spec[k]) + meps);
        for (int m = 0; m < mels; ++m) {
          const auto& flt = filters[m];
          T acc = 0;
          for (std::size_t j = 0; j < flt.weights.size(); ++j) acc += flt.weights[j] * mag[flt.start + j];
          const std::size_t idx = (static_cast<std::size_t>(b) * mels + m) * frames + f;
          (*mel_lin)[idx] = acc;
          y.data[idx] = std::log(std::max(acc, floor));
        }
      }
    }

    return nn::make_result<T>(std::move(y), {x}, [=, fft = fft_, window_p = window_,
                                                  filters_p = filters_,
                                                  bins = bins_](nn::Node<T>& n) {
      T* gx = nn::grad_of(n, 0);
      if (!gx) return;
      const auto& window = *window_p;
      const auto& filters = *filters_p;
      std::vector<T> gmag(bins);
      std::vector<std::complex<T>> z(bins);
      std::vector<T> gframe(n_fft);
      for (int b = 0; b < batch; ++b) {
        for (int f = 0; f < frames; ++f) {
          std::fill(gmag.begin(), gmag.end(), T(0));
          bool any = false;
          for (int m = 0; m < mels; ++m) {
            const std::size_t idx = (static_cast<std::size_t>(b) * mels + m) * frames + f;
            const T lin = (*mel_lin)[idx];
            if (!(lin > floor)) continue;
            const T g = n.grad[idx] / lin;
            if (g == T(0)) continue;
            any = true;
            const auto& flt = filters[m];
            for (std::size_t j = 0; j < flt.weights.size(); ++j) gmag[flt.start + j] += g * flt.weights[j];
          }
          if (!any) continue;
          const auto* spec = &(*spectra)[(static_cast<std::size_t>(b) * frames + f) * bins];
          const auto* mag = &(*mags)[(static_cast<std::size_t>(b) * frames + f) * bins];
          // d|X_k|/d(xw)_j = Re(X_k e^{+i theta_jk}) / |X_k|; the c2r
          // transform doubles interior bins, so halve them here.
          for (int k = 0; k < bins; ++k) {
            const T c = gmag[k] / mag[k];
            const T half = (k == 0 || 2 * k == n_fft) ? T(1) : T(0.5);
            z[k] = spec[k] * (c * half);
          }
          fft.inverse_real(z.data(), gframe.data());
          T* gr = gx + static_cast<std::size_t>(b) * len + static_cast<std::size_t>(f) * hop;
          for (int i = 0; i < n_fft; ++i) gr[i] += gframe[i] * window[i];
        }
      }
    });
  }

 private:
  struct Filter {
    int start = 0;
    std::vector<T> weights;
  };

  MelConfig cfg_;
  nn::RealFft<T> fft_;
  std::shared_ptr<const std::vector<T>> window_;
  std::shared_ptr<const std::vector<Filter>> filters_;
  int bins_ = 0;
};

// Log-mel spectrogram of a 16 kHz clip as a num_mels x frames matrix.
inline Eigen::MatrixXf mel_spectrogram(const Waveform& wave, const MelConfig& cfg = {}) {
  if (wave.sample_rate != cfg.fs) {
    throw data_error("mel_spectrogram expects " + std::to_string(cfg.fs) + " Hz audio");
  }
  if (wave.size() < static_cast<std::size_t>(cfg.fft_size)) {
    throw data_error("clip shorter than one FFT window (" +
                     std::to_string(cfg.fft_size) + " samples)");
  }
  nn::NoGradGuard guard;
  const LogMel<float> mel(cfg);
  nn::Var<float> x(nn::Tensor<float>({1, 1, static_cast<int>(wave.size())}, wave.samples));
  const auto y = mel(x);
  Eigen::MatrixXf out(cfg.num_mels, y.dim(2));
  for (int m = 0; m < cfg.num_mels; ++m) {
    for (int f = 0; f < y.dim(2); ++f) out(m, f) = y.data()[static_cast<std::size_t>(m) * y.dim(2) + f];
  }
  return out;
}

}  // namespace articodec::vocoder
