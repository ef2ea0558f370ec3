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

#include <filesystem>
#include <string>
#include <string_view>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/types.hpp"

namespace articodec {

// .artf container:
//   "ARTF" | u8 version=1 | u32 n_frames | u8 n_channels=14 | u32 rate=50 |
//   n_frames x 14 float32 (frame-major; 12 EMA, f0, loudness) |
//   n_frames float32 periodicity
inline constexpr std::string_view kArtfMagic = "ARTF";
inline constexpr std::uint8_t kArtfVersion = 1;
inline constexpr std::size_t kArtfHeaderBytes = 14;

inline std::string encode_features(const ArticulatoryFeatures& f) {
  f.validate();
  const auto t = f.frames();
  ByteWriter w;
  w.bytes(kArtfMagic);
  w.u8(kArtfVersion);
  w.u32(static_cast<std::uint32_t>(t));
  w.u8(kFeatureChannels);
  w.u32(kFeatureRate);
  for (std::size_t i = 0; i < t; ++i) {
    for (int c = 0; c < kFeatureChannels; ++c) w.f32(f.channel(c, i));
  }
  w.f32s(f.source.periodicity);
  return w.take();
}

inline ArticulatoryFeatures decode_features(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kArtfMagic) {
    throw ParseError("magic", "bad magic: expected \"ARTF\"");
  }
  if (const auto v = r.u8("version"); v != kArtfVersion) {
    throw ParseError("version",
                     "unsupported version " + std::to_string(v) + ", expected 1");
  }
  const std::uint32_t t = r.u32("n_frames");
  if (const auto c = r.u8("n_channels"); c != kFeatureChannels) {
    throw ParseError("n_channels", "expected 14 channels, found " +
                                       std::to_string(c));
  }
  if (const auto rate = r.u32("rate_hz"); rate != kFeatureRate) {
    throw ParseError("rate_hz",
                     "expected rate 50 Hz, found " + std::to_string(rate));
  }
  const std::size_t expected = static_cast<std::size_t>(t) * (kFeatureChannels + 1) * 4;
  if (r.remaining() != expected) {
    throw ParseError("payload", "payload length mismatch: expected " +
                                    std::to_string(expected) + " bytes, found " +
                                    std::to_string(r.remaining()));
  }
  ArticulatoryFeatures f;
  f.ema.values.resize(kEmaChannels, t);
  f.source.f0.resize(t);
  f.source.loudness.resize(t);
  f.source.periodicity.resize(t);
  for (std::size_t i = 0; i < t; ++i) {
    for (int c = 0; c < kFeatureChannels; ++c) f.channel(c, i) = r.f32("payload");
  }
  for (std::size_t i = 0; i < t; ++i) f.source.periodicity[i] = r.f32("periodicity");
  return f;
}

inline void write_features(const ArticulatoryFeatures& f,
                           const std::filesystem::path& path) {
  write_file_atomic(path, encode_features(f));
}

inline ArticulatoryFeatures read_features(const std::filesystem::path& path) {
  return decode_features(read_file(path));
}

// .spk container: "SPKE" | u8 version=1 | 64 float32.
inline std::string encode_embedding(const SpeakerEmbedding& e) {
  ByteWriter w;
  w.bytes("SPKE");
  w.u8(1);
  w.f32s(e.vector);
  return w.take();
}

inline SpeakerEmbedding decode_embedding(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != "SPKE") {
    throw ParseError("magic", "bad magic: expected \"SPKE\"");
  }
  if (r.u8("version") != 1) throw ParseError("version", "unsupported version");
  if (r.remaining() != kSpeakerDim * 4) {
    throw ParseError("payload", "payload length mismatch: expected 64 floats");
  }
  SpeakerEmbedding e;
  for (auto& v : e.vector) v = r.f32("payload");
  return e;
}

inline void write_embedding(const SpeakerEmbedding& e,
                            const std::filesystem::path& path) {
  write_file_atomic(path, encode_embedding(e));
}

inline SpeakerEmbedding read_embedding(const std::filesystem::path& path) {
  return decode_embedding(read_file(path));
}

}  // namespace articodec
