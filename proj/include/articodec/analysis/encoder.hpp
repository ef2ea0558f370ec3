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

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "articodec/core/digest.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"
#include "articodec/nn/fft.hpp"

namespace articodec::analysis {

using FeatureMatrix = Eigen::MatrixXf;  // T x D, one row per frame

// Per-layer frame features of one utterance.
struct SslFeatureStack {
  std::string encoder_id;
  int rate = kFeatureRate;
  std::vector<int> layer_ids;
  std::vector<FeatureMatrix> layers;

  Eigen::Index frames() const { return layers.empty() ? 0 : layers.front().rows(); }
  Eigen::Index dim() const { return layers.empty() ? 0 : layers.front().cols(); }

  const FeatureMatrix& layer(int id) const {
    for (std::size_t i = 0; i < layer_ids.size(); ++i) {
      if (layer_ids[i] == id) return layers[i];
    }
    throw usage_error("layer " + std::to_string(id) + " not in feature stack");
  }

  void validate() const {
    if (layers.size() != layer_ids.size()) throw data_error("feature stack: layer ids and layers differ");
    for (const auto& l : layers) {
      if (l.rows() != frames() || l.cols() != dim()) throw data_error("feature stack: inconsistent layer shapes");
      if (!l.allFinite()) throw data_error("feature stack: non-finite features");
    }
  }
};

// Frozen speech encoder. Implementations never change after construction.
class SslEncoder {
 public:
  virtual ~SslEncoder() = default;
  virtual std::string id() const = 0;
  virtual int num_layers() const = 0;
  virtual int dim() const = 0;
  virtual int frontend_dim() const = 0;
  virtual int frame_rate() const { return kFeatureRate; }
  // Number of frames produced for a clip of `samples` samples at 16 kHz.
  virtual Eigen::Index frames_for(std::size_t samples) const = 0;
  virtual SslFeatureStack extract(const Waveform& wave, const std::vector<int>& layers) const = 0;
  // Convolutional front-end output (before the transformer), T x frontend_dim.
  virtual FeatureMatrix frontend(const Waveform& wave) const = 0;
};

// Deterministic stand-in encoder: log band energies of 25 ms windows every
// 20 ms, with +-1 frame context, pushed through fixed random projections
// (one per layer, seeded from the encoder id) and tanh.
class MockSslEncoder : public SslEncoder {
 public:
  static constexpr int kWindow = 400;
  static constexpr int kHop = 320;
  static constexpr int kFft = 512;
  static constexpr int kBands = 40;
  static constexpr int kContext = 3 * kBands;

  explicit MockSslEncoder(std::string id = "mock-ssl", int layers = 25, int dim = 1024,
                          int frontend_dim = 1024)
      : id_(std::move(id)), n_layers_(layers), dim_(dim), frontend_dim_(frontend_dim), fft_(kFft) {
    if (layers < 1 || dim < 1 || frontend_dim < 1) throw usage_error("mock encoder: sizes must be positive");
    for (int l = 0; l < layers; ++l) projections_.push_back(make_projection("layer" + std::to_string(l), dim));
    frontend_proj_ = make_projection("frontend", frontend_dim);
  }

  std::string id() const override { return id_; }
  int num_layers() const override { return n_layers_; }
  int dim() const override { return dim_; }
  int frontend_dim() const override { return frontend_dim_; }

  Eigen::Index frames_for(std::size_t samples) const override {
    if (samples < static_cast<std::size_t>(kWindow)) return 0;
    return static_cast<Eigen::Index>((samples - kWindow) / kHop + 1);
  }

  SslFeatureStack extract(const Waveform& wave, const std::vector<int>& layers) const override {
    const auto ctx = context(wave);
    SslFeatureStack s;
    s.encoder_id = id_;
    for (int l : layers) {
      if (l < 0 || l >= n_layers_) {
        throw usage_error("encoder " + id_ + " has layers 0.." + std::to_string(n_layers_ - 1) +
                          ", requested " + std::to_string(l));
      }
      s.layer_ids.push_back(l);
      s.layers.push_back(project(ctx, projections_[l]));
    }
    return s;
  }

  FeatureMatrix frontend(const Waveform& wave) const override { return project(context(wave), frontend_proj_); }

 private:
  struct Projection {
    Eigen::MatrixXf w;  // kContext x out
    Eigen::RowVectorXf b;
  };

  Projection make_projection(const std::string& tag, int out) const {
    const auto h = sha256_hex(id_ + "/" + tag);
    std::mt19937_64 rng(std::stoull(h.substr(0, 16), nullptr, 16));
    std::normal_distribution<float> n(0.0f, 1.0f);
    Projection p{Eigen::MatrixXf(kContext, out), Eigen::RowVectorXf(out)};
    const float scale = 1.0f / std::sqrt(static_cast<float>(kContext));
    for (Eigen::Index i = 0; i < p.w.size(); ++i) p.w.data()[i] = n(rng) * scale;
    for (Eigen::Index i = 0; i < p.b.size(); ++i) p.b[i] = 0.1f * n(rng);
    return p;
  }

  // T x kContext matrix of standardized log band energies with context.
  Eigen::MatrixXf context(const Waveform& wave) const {
    if (wave.sample_rate != kInternalRate) {
      throw data_error("SSL encoder expects 16 kHz audio, got " + std::to_string(wave.sample_rate));
    }
    const auto t = frames_for(wave.size());
    if (t < 1) throw data_error("clip shorter than one SSL encoder window (400 samples)");
    Eigen::MatrixXf bands(t, kBands);
    std::vector<float> buf(kFft);
    std::vector<std::complex<float>> spec(kFft / 2 + 1);
    for (Eigen::Index f = 0; f < t; ++f) {
      std::fill(buf.begin(), buf.end(), 0.0f);
      for (int i = 0; i < kWindow; ++i) {
        const float w = 0.5f - 0.5f * std::cos(2.0f * std::numbers::pi_v<float> * i / kWindow);
        buf[i] = wave.samples[static_cast<std::size_t>(f * kHop + i)] * w;
      }
      fft_.forward(buf.data(), spec.data());
      const int per_band = (kFft / 2) / kBands;
      for (int b = 0; b < kBands; ++b) {
        double e = 0;
        for (int k = 1 + b * per_band; k < 1 + (b + 1) * per_band; ++k) e += std::norm(spec[k]);
        bands(f, b) = static_cast<float>(std::log(1e-6 + e));
      }
    }
    // Standardize each band within the clip so features are level invariant.
    for (int b = 0; b < kBands; ++b) {
      auto col = bands.col(b);
      const float m = col.mean();
      const float sd = std::sqrt((col.array() - m).square().mean());
      col = (col.array() - m) / (sd > 1e-6f ? sd : 1.0f);
    }
    Eigen::MatrixXf ctx(t, kContext);
    for (Eigen::Index f = 0; f < t; ++f) {
      ctx.block(f, 0, 1, kBands) = bands.row(std::max<Eigen::Index>(f - 1, 0));
      ctx.block(f, kBands, 1, kBands) = bands.row(f);
      ctx.block(f, 2 * kBands, 1, kBands) = bands.row(std::min<Eigen::Index>(f + 1, t - 1));
    }
    return ctx;
  }

  static FeatureMatrix project(const Eigen::MatrixXf& ctx, const Projection& p) {
    FeatureMatrix out = ctx * p.w;
    out.rowwise() += p.b;
    return out.array().tanh().matrix();
  }

  std::string id_;
  int n_layers_, dim_, frontend_dim_;
  nn::RealFft<float> fft_;
  std::vector<Projection> projections_;
  Projection frontend_proj_;
};

// Placeholder for a real pretrained encoder whose weights are not bundled.
class ExternalSslEncoder : public SslEncoder {
 public:
  explicit ExternalSslEncoder(std::string id, std::string asset_path = {})
      : id_(std::move(id)), asset_(std::move(asset_path)) {}

  std::string id() const override { return id_; }
  int num_layers() const override { return 25; }
  int dim() const override { return 1024; }
  int frontend_dim() const override { return 1024; }
  Eigen::Index frames_for(std::size_t samples) const override {
    return samples < 400 ? 0 : static_cast<Eigen::Index>((samples - 400) / 320 + 1);
  }
  SslFeatureStack extract(const Waveform&, const std::vector<int>&) const override { unavailable(); }
  FeatureMatrix frontend(const Waveform&) const override { unavailable(); }

 private:
  [[noreturn]] void unavailable() const {
    throw missing_asset("speech encoder '" + id_ + "' is not available" +
                        (asset_.empty() ? std::string() : " at " + asset_) +
                        ". Download the pretrained model weights and export per-layer features with "
                        "an external tool, or use encoder id 'mock-ssl' for a self-contained run.");
  }

  std::string id_, asset_;
};

// Serves fixed per-layer features regardless of the audio. Test double.
class PlantedSslEncoder : public SslEncoder {
 public:
  PlantedSslEncoder(std::string id, std::vector<FeatureMatrix> layers, FeatureMatrix frontend = {})
      : id_(std::move(id)), layers_(std::move(layers)), frontend_(std::move(frontend)) {
    if (layers_.empty()) throw usage_error("planted encoder needs at least one layer");
  }

  std::string id() const override { return id_; }
  int num_layers() const override { return static_cast<int>(layers_.size()); }
  int dim() const override { return static_cast<int>(layers_.front().cols()); }
  int frontend_dim() const override { return static_cast<int>(frontend_.cols()); }
  Eigen::Index frames_for(std::size_t) const override { return layers_.front().rows(); }

  SslFeatureStack extract(const Waveform&, const std::vector<int>& layers) const override {
    SslFeatureStack s;
    s.encoder_id = id_;
    for (int l : layers) {
      if (l < 0 || l >= num_layers()) throw usage_error("planted encoder: no layer " + std::to_string(l));
      s.layer_ids.push_back(l);
      s.layers.push_back(layers_[l]);
    }
    return s;
  }
  FeatureMatrix frontend(const Waveform&) const override {
    if (frontend_.size() == 0) throw usage_error("planted encoder has no front-end features");
    return frontend_;
  }

 private:
  std::string id_;
  std::vector<FeatureMatrix> layers_;
  FeatureMatrix frontend_;
};

// Returns a stack for the requested layers from a 16 kHz clip.
inline SslFeatureStack extract_ssl_features(const Waveform& wave, const SslEncoder& encoder,
                                            const std::vector<int>& layers) {
  auto s = encoder.extract(wave, layers);
  s.validate();
  return s;
}

// Encoder factory keyed by id: "mock-ssl" (25 layers, 1024-d), "mock-ssl-tiny"
// (4 layers, 64-d) or anything else, which is treated as an external model.
inline std::shared_ptr<const SslEncoder> make_encoder(const std::string& id, const std::string& asset = {}) {
  if (id == "mock-ssl") return std::make_shared<MockSslEncoder>(id);
  if (id == "mock-ssl-tiny") return std::make_shared<MockSslEncoder>(id, 4, 64, 64);
  return std::make_shared<ExternalSslEncoder>(id, asset);
}

}  // namespace articodec::analysis
