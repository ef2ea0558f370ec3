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

#include <filesystem>
#include <string>
#include <string_view>

#include "articodec/analysis/linear_map.hpp"
#include "articodec/core/binary_io.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"

namespace articodec::alignment {

using Matrix12 = Eigen::Matrix<float, kEmaChannels, kEmaChannels>;
using Vector12 = Eigen::Matrix<float, kEmaChannels, 1>;
using CoefficientMap = Eigen::Matrix<double, 6, 6>;

// Per-frame x -> W x + b between two speakers' 12-channel EMA spaces.
struct AffineMap {
  Matrix12 weights = Matrix12::Identity();
  Vector12 bias = Vector12::Zero();
  std::string src_speaker;
  std::string tgt_speaker;

  bool finite() const { return weights.allFinite() && bias.allFinite(); }
};

inline double default_affine_lambda(Eigen::Index frames) { return 1e-4 * static_cast<double>(frames); }

// Ridge fit on time-aligned frame pairs; lambda < 0 selects 1e-4 * T.
inline AffineMap fit_affine(const EmaMatrix& src, const EmaMatrix& tgt, double lambda = -1,
                            std::string src_speaker = {}, std::string tgt_speaker = {}) {
  if (src.cols() != tgt.cols()) {
    throw usage_error("affine fit needs time-aligned frames (" + std::to_string(src.cols()) + " vs " +
                      std::to_string(tgt.cols()) + ")");
  }
  if (lambda == 0.0 && src.cols() < kEmaChannels + 1) {
    throw data_error("affine fit without regularization needs at least 13 frames, got " +
                     std::to_string(src.cols()));
  }
  if (lambda < 0) lambda = default_affine_lambda(src.cols());
  const auto s = analysis::ridge_fit(src.transpose().cast<double>(), tgt.transpose().cast<double>(), lambda);
  AffineMap m;
  m.weights = s.weights.transpose().cast<float>();
  m.bias = s.bias.cast<float>();
  m.src_speaker = std::move(src_speaker);
  m.tgt_speaker = std::move(tgt_speaker);
  if (!m.finite()) throw data_error("affine fit produced non-finite coefficients");
  return m;
}

inline EmaTrace apply_affine(const AffineMap& map, const EmaTrace& trace) {
  if (trace.values.rows() != kEmaChannels) throw usage_error("affine map expects 12 EMA channels");
  EmaTrace out;
  out.rate = trace.rate;
  out.values = (map.weights * trace.values).colwise() + map.bias;
  return out;
}

// second after first.
inline AffineMap compose(const AffineMap& second, const AffineMap& first) {
  AffineMap m;
  m.weights = second.weights * first.weights;
  m.bias = second.weights * first.bias + second.bias;
  m.src_speaker = first.src_speaker;
  m.tgt_speaker = second.tgt_speaker;
  return m;
}

// Block (i, j): mean |W| over the 2x2 block from articulator j's (x, y)
// inputs to articulator i's (x, y) outputs, order UL LL LI TT TB TD.
inline CoefficientMap coefficient_map(const AffineMap& map) {
  CoefficientMap c;
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      c(i, j) = map.weights.block<2, 2>(2 * i, 2 * j).cast<double>().cwiseAbs().sum() / 4.0;
    }
  }
  return c;
}

inline constexpr std::string_view kAffnMagic = "AFFN";
inline constexpr std::uint8_t kAffnVersion = 1;

inline std::string encode_affine(const AffineMap& m) {
  if (!m.finite()) throw data_error("affine map has non-finite values");
  ByteWriter w;
  w.bytes(kAffnMagic);
  w.u8(kAffnVersion);
  w.str(m.src_speaker);
  w.str(m.tgt_speaker);
  for (int r = 0; r < kEmaChannels; ++r) {
    for (int c = 0; c < kEmaChannels; ++c) w.f32(m.weights(r, c));
  }
  for (int r = 0; r < kEmaChannels; ++r) w.f32(m.bias[r]);
  return w.take();
}

inline AffineMap decode_affine(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kAffnMagic) throw ParseError("magic", "not an affine map file");
  const auto v = r.u8("version");
  if (v != kAffnVersion) throw ParseError("version", "unsupported affine map version " + std::to_string(v));
  AffineMap m;
  m.src_speaker = r.str("src_speaker");
  m.tgt_speaker = r.str("tgt_speaker");
  if (r.remaining() != (kEmaChannels * kEmaChannels + kEmaChannels) * 4) {
    throw ParseError("payload", "payload length mismatch");
  }
  for (int i = 0; i < kEmaChannels; ++i) {
    for (int c = 0; c < kEmaChannels; ++c) m.weights(i, c) = r.f32("weights");
  }
  for (int i = 0; i < kEmaChannels; ++i) m.bias[i] = r.f32("bias");
  return m;
}

inline void write_affine(const std::filesystem::path& p, const AffineMap& m) { write_file_atomic(p, encode_affine(m)); }
inline AffineMap read_affine(const std::filesystem::path& p) { return decode_affine(read_file(p)); }

}  // namespace articodec::alignment
