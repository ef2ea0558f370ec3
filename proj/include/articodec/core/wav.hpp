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

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/types.hpp"

namespace articodec {

// RIFF/WAVE decoding for PCM 8/16/24/32-bit and IEEE float 32/64; channels
// are averaged down to mono.
inline Waveform decode_wav(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "riff") != "RIFF") throw ParseError("riff", "not a RIFF file");
  r.u32("riff_size");
  if (r.bytes(4, "wave") != "WAVE") throw ParseError("wave", "not a WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  while (r.remaining() >= 8) {
    const auto id = r.bytes(4, "chunk_id");
    const std::uint32_t size = r.u32("chunk_size");
    if (id == "fmt ") {
      ByteReader fmt(r.bytes(size, "fmt"));
      format = fmt.u16("format");
      channels = fmt.u16("channels");
      rate = fmt.u32("sample_rate");
      fmt.u32("byte_rate");
      fmt.u16("block_align");
      bits = fmt.u16("bits_per_sample");
      if (format == 0xFFFE && size >= 26) {
        // WAVE_FORMAT_EXTENSIBLE: the sub-format GUID starts with the tag.
        fmt.u16("cb_size");
        fmt.u16("valid_bits");
        fmt.u32("channel_mask");
        format = fmt.u16("sub_format");
      }
      have_fmt = true;
      if (size % 2) r.bytes(1, "pad");
    } else if (id == "data") {
      if (!have_fmt) throw ParseError("fmt", "data chunk before fmt chunk");
      if (channels == 0) throw ParseError("channels", "zero channels");
      const bool is_float = format == 3;
      if (!(format == 1 || is_float)) {
        throw ParseError("format", "unsupported WAV format tag " +
                                       std::to_string(format));
      }
      if (is_float ? !(bits == 32 || bits == 64)
                   : !(bits == 8 || bits == 16 || bits == 24 || bits == 32)) {
        throw ParseError("bits", "unsupported bit depth " + std::to_string(bits));
      }
      const std::size_t bps = bits / 8;
      const std::size_t avail = std::min<std::size_t>(size, r.remaining());
      const std::size_t frames = avail / (bps * channels);
      auto data = r.bytes(frames * bps * channels, "data");
      Waveform w;
      w.sample_rate = static_cast<int>(rate);
      w.samples.resize(frames);
      ByteReader d(data);
      for (std::size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
          double v = 0.0;
          if (is_float) {
            v = bits == 32 ? d.f32("data") : d.f64("data");
          } else if (bits == 8) {
            v = (static_cast<int>(d.u8("data")) - 128) / 128.0;
          } else if (bits == 16) {
            v = static_cast<std::int16_t>(d.u16("data")) / 32768.0;
          } else if (bits == 24) {
            const auto raw = d.bytes(3, "data");
            std::int32_t s = static_cast<std::uint8_t>(raw[0]) |
                             (static_cast<std::uint8_t>(raw[1]) << 8) |
                             (static_cast<std::uint8_t>(raw[2]) << 16);
            if (s & 0x800000) s -= 0x1000000;
            v = s / 8388608.0;
          } else {
            v = static_cast<std::int32_t>(d.u32("data")) / 2147483648.0;
          }
          acc += v;
        }
        w.samples[i] = static_cast<float>(acc / channels);
      }
      return w;
    } else {
      r.bytes(std::min<std::size_t>(size + (size % 2), r.remaining()), "chunk");
    }
  }
  throw ParseError("data", "no data chunk");
}

enum class WavEncoding { kFloat32, kPcm16 };

inline std::string encode_wav(const Waveform& w,
                              WavEncoding enc = WavEncoding::kFloat32) {
  const std::uint16_t bits = enc == WavEncoding::kFloat32 ? 32 : 16;
  const std::uint32_t data_bytes =
      static_cast<std::uint32_t>(w.samples.size() * (bits / 8));
  ByteWriter b;
  b.bytes("RIFF");
  b.u32(36 + data_bytes);
  b.bytes("WAVE");
  b.bytes("fmt ");
  b.u32(16);
  b.u16(enc == WavEncoding::kFloat32 ? 3 : 1);
  b.u16(1);  // mono
  b.u32(static_cast<std::uint32_t>(w.sample_rate));
  b.u32(static_cast<std::uint32_t>(w.sample_rate) * (bits / 8));
  b.u16(bits / 8);
  b.u16(bits);
  b.bytes("data");
  b.u32(data_bytes);
  for (float s : w.samples) {
    if (enc == WavEncoding::kFloat32) {
      b.f32(s);
    } else {
      const float c = std::clamp(s, -1.0f, 1.0f);
      b.u16(static_cast<std::uint16_t>(
          static_cast<std::int16_t>(std::lrint(c * 32767.0f))));
    }
  }
  return b.take();
}

inline Waveform read_wav(const std::filesystem::path& path) {
  return decode_wav(read_file(path));
}

inline void write_wav(const Waveform& w, const std::filesystem::path& path,
                      WavEncoding enc = WavEncoding::kFloat32) {
  write_file_atomic(path, encode_wav(w, enc));
}

}  // namespace articodec
