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
#include <vector>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/error.hpp"
#include "articodec/nn/layers.hpp"

namespace articodec::vocoder {

inline constexpr std::string_view kCheckpointMagic = "ACKP";
inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

struct NamedTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<float> data;
};

// Named float32 tensors plus run metadata. Order is preserved on disk.
struct Checkpoint {
  std::uint64_t step = 0;
  double lr = 0;
  std::string config_hash;
  std::string config_dump;
  std::vector<NamedTensor> tensors;

  const NamedTensor* find(const std::string& name) const {
    for (const auto& t : tensors) {
      if (t.name == name) return &t;
    }
    return nullptr;
  }

  void add(const nn::NamedParams<float>& params) {
    for (const auto& [name, p] : params) tensors.push_back({name, p.shape(), p.data()});
  }

  // Copies stored values into params; every param must be present with the
  // same shape.
  void restore(const nn::NamedParams<float>& params) const {
    for (const auto& [name, p] : params) {
      const auto* t = find(name);
      if (!t) throw data_error("checkpoint is missing tensor " + name);
      if (t->shape != p.shape()) {
        throw data_error("checkpoint tensor " + name + " has shape " + nn::shape_str(t->shape) +
                         ", expected " + nn::shape_str(p.shape()));
      }
      auto v = p;
      v.mutable_value().data = t->data;
    }
  }
};

inline std::string encode_checkpoint(const Checkpoint& c) {
  ByteWriter w;
  w.bytes(kCheckpointMagic);
  w.u32(kCheckpointVersion);
  w.u64(c.step);
  w.f64(c.lr);
  w.str(c.config_hash);
  w.str(c.config_dump);
  w.u32(static_cast<std::uint32_t>(c.tensors.size()));
  for (const auto& t : c.tensors) {
    w.str(t.name);
    w.u8(kDtypeFloat32);
    w.u8(static_cast<std::uint8_t>(t.shape.size()));
    for (int d : t.shape) w.u32(static_cast<std::uint32_t>(d));
    w.u64(t.data.size());
    w.f32s(t.data);
  }
  return w.take();
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "magic") != kCheckpointMagic) {
    throw ParseError("magic", "not a vocoder checkpoint");
  }
  const auto version = r.u32("version");
  if (version != kCheckpointVersion) {
    throw ParseError("version", "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint c;
  c.step = r.u64("step");
  c.lr = r.f64("lr");
  c.config_hash = r.str("config_hash");
  c.config_dump = r.str("config_dump");
  const auto n = r.u32("tensor_count");
  for (std::uint32_t i = 0; i < n; ++i) {
    NamedTensor t;
    t.name = r.str("tensor_name");
    if (r.u8("dtype") != kDtypeFloat32) throw ParseError("dtype", "tensor " + t.name + " is not float32");
    const auto ndim = r.u8("ndim");
    std::size_t count = 1;
    for (int d = 0; d < ndim; ++d) {
      t.shape.push_back(static_cast<int>(r.u32("shape")));
      count *= static_cast<std::size_t>(t.shape.back());
    }
    const auto stored = r.u64("element_count");
    if (stored != count) throw ParseError("element_count", "tensor " + t.name + " size disagrees with shape");
    if (count > r.remaining() / 4) throw ParseError("payload", "truncated tensor " + t.name);
    t.data.resize(count);
    for (auto& v : t.data) v = r.f32("payload");
    c.tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0) throw ParseError("payload", "trailing bytes after last tensor");
  return c;
}

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  write_file_atomic(path, encode_checkpoint(c));
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file(path));
}

}  // namespace articodec::vocoder
