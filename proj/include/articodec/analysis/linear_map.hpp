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

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/filter.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/signal.hpp"
#include "articodec/core/types.hpp"

namespace articodec::analysis {

// Affine least-squares solution Y ~ X W + b.
struct RidgeSolution {
  Eigen::MatrixXd weights;  // D x K
  Eigen::VectorXd bias;     // K
  double lambda = 0;
};

inline double default_lambda(Eigen::Index frames) { return 1e-3 * static_cast<double>(frames); }

// Ridge regression with an unpenalized intercept (data are centered).
// lambda < 0 selects the default 1e-3 * T.
inline RidgeSolution ridge_fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda = -1) {
  if (x.rows() != y.rows()) {
    throw usage_error("ridge: frame count mismatch (" + std::to_string(x.rows()) + " vs " +
                      std::to_string(y.rows()) + ")");
  }
  if (x.rows() < 2) throw data_error("ridge: need at least 2 frames");
  if (!x.allFinite() || !y.allFinite()) throw data_error("ridge: non-finite input");
  if (lambda < 0) lambda = default_lambda(x.rows());
  if (x.rows() <= x.cols()) {
    warn("ridge: " + std::to_string(x.rows()) + " frames for " + std::to_string(x.cols()) +
         " features; the fit is underdetermined without regularization");
  }
  const Eigen::RowVectorXd mx = x.colwise().mean();
  const Eigen::RowVectorXd my = y.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mx;
  const Eigen::MatrixXd yc = y.rowwise() - my;
  Eigen::MatrixXd gram = xc.transpose() * xc;
  gram.diagonal().array() += lambda;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  const auto d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  if (ldlt.info() != Eigen::Success || !(dmax > 0) || d.minCoeff() <= 1e-12 * dmax) {
    throw data_error("ridge: feature matrix is rank-deficient; use a regularization lambda > 0");
  }
  RidgeSolution s;
  s.lambda = lambda;
  s.weights = ldlt.solve(xc.transpose() * yc);
  s.bias = (my - mx * s.weights).transpose();
  return s;
}

// SSL features (D) to 12 EMA channels.
struct LinearMap {
  Eigen::MatrixXf weights;  // D x 12
  Eigen::VectorXf bias;     // 12
  int source_layer = 0;
  std::string encoder_id;

  Eigen::Index dim() const { return weights.rows(); }

  void validate() const {
    if (weights.cols() != kEmaChannels || bias.size() != kEmaChannels) {
      throw data_error("linear map must have 12 output channels");
    }
    if (!weights.allFinite() || !bias.allFinite()) throw data_error("linear map has non-finite values");
  }
};

inline LinearMap fit_linear_aai(const Eigen::MatrixXd& features, const Eigen::MatrixXd& ema_targets,
                                double lambda = -1, int layer = 0, std::string encoder_id = {}) {
  if (ema_targets.cols() != kEmaChannels) {
    throw usage_error("EMA targets must have 12 channels, got " + std::to_string(ema_targets.cols()));
  }
  const auto s = ridge_fit(features, ema_targets, lambda);
  return LinearMap{s.weights.cast<float>(), s.bias.cast<float>(), layer, std::move(encoder_id)};
}

// features (T x D) * W + b, as a 12 x T matrix, without smoothing.
inline Eigen::MatrixXf predict_ema_raw(const LinearMap& map, const Eigen::MatrixXf& features) {
  if (features.cols() != map.dim()) {
    throw usage_error("feature dimension " + std::to_string(features.cols()) + " does not match map dimension " +
                      std::to_string(map.dim()));
  }
  Eigen::MatrixXf y = (features * map.weights).transpose();
  y.colwise() += map.bias;
  return y;
}

// Affine map followed by the 10 Hz low-pass.
inline EmaTrace predict_ema(const LinearMap& map, const Eigen::MatrixXf& features) {
  Eigen::MatrixXf y = predict_ema_raw(map, features);
  lowpass_rows_inplace(y);
  return EmaTrace{EmaMatrix(y), kFeatureRate};
}

// Raw 12 x T EMA to fitting targets: per-utterance z-score, then 10 Hz low-pass.
inline EmaMatrix prepare_ema_targets(EmaMatrix ema) {
  zscore_rows_inplace(ema);
  lowpass_rows_inplace(ema);
  return ema;
}

inline constexpr std::string_view kAaiwMagic = "AAIW";
inline constexpr std::uint8_t kAaiwVersion = 1;

inline std::string encode_linear_map(const LinearMap& m) {
  m.validate();
  ByteWriter w;
  w.bytes(kAaiwMagic);
  w.u8(kAaiwVersion);
  w.str(m.encoder_id);
  if (m.source_layer < 0 || m.source_layer > 255) throw usage_error("layer index must fit in one byte");
  w.u8(static_cast<std::uint8_t>(m.source_layer));
  w.u32(static_cast<std::uint32_t>(m.dim()));
  for (Eigen::Index d = 0; d < m.dim(); ++d) {
    for (int c = 0; c < kEmaChannels; ++c) w.f32(m.weights(d, c));
  }
  for (int c = 0; c < kEmaChannels; ++c) w.f32(m.bias[c]);
  return w.take();
}

inline LinearMap decode_linear_map(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kAaiwMagic) throw ParseError("magic", "not a linear map file");
  const auto v = r.u8("version");
  if (v != kAaiwVersion) throw ParseError("version", "unsupported linear map version " + std::to_string(v));
  LinearMap m;
  m.encoder_id = r.str("encoder_id");
  m.source_layer = r.u8("layer");
  const auto d = r.u32("dim");
  if (static_cast<std::size_t>(d) * kEmaChannels * 4 + kEmaChannels * 4 != r.remaining()) {
    throw ParseError("payload", "payload length mismatch");
  }
  m.weights.resize(d, kEmaChannels);
  for (std::uint32_t i = 0; i < d; ++i) {
    for (int c = 0; c < kEmaChannels; ++c) m.weights(i, c) = r.f32("weights");
  }
  m.bias.resize(kEmaChannels);
  for (int c = 0; c < kEmaChannels; ++c) m.bias[c] = r.f32("bias");
  return m;
}

inline void write_linear_map(const std::filesystem::path& p, const LinearMap& m) {
  write_file_atomic(p, encode_linear_map(m));
}

inline LinearMap read_linear_map(const std::filesystem::path& p) { return decode_linear_map(read_file(p)); }

}  // namespace articodec::analysis
