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

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/types.hpp"

namespace articodec::eval {

struct EmbeddingRow {
  std::string id;
  std::string label;
  SpeakerEmbedding embedding;
};

// ".csv" gets commas, anything else tabs.
inline char table_separator(const std::filesystem::path& path) { return path.extension() == ".csv" ? ',' : '\t'; }

inline std::string format_embedding_table(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                                          const std::vector<SpeakerEmbedding>& embeddings, char sep) {
  if (ids.size() != embeddings.size() || labels.size() != embeddings.size()) {
    throw usage_error("export: ids, labels and embeddings differ in length");
  }
  std::string out = "id";
  out += sep;
  out += "label";
  for (int i = 0; i < kSpeakerDim; ++i) out += sep + ("e" + std::to_string(i));
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < ids.size(); ++r) {
    for (const auto* s : {&ids[r], &labels[r]}) {
      if (s->find_first_of(std::string{sep, '\n', '\r'}) != std::string::npos) {
        throw usage_error("export: field '" + *s + "' contains a separator or newline");
      }
    }
    out += ids[r];
    out += sep;
    out += labels[r];
    for (float v : embeddings[r].vector) {
      std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(v));
      out += sep;
      out += buf;
    }
    out += '\n';
  }
  return out;
}

inline void export_embeddings(const std::vector<std::string>& ids, const std::vector<std::string>& labels,
                              const std::vector<SpeakerEmbedding>& embeddings, const std::filesystem::path& path) {
  write_file_atomic(path, format_embedding_table(ids, labels, embeddings, table_separator(path)));
}

inline std::vector<EmbeddingRow> read_embedding_table(const std::filesystem::path& path) {
  const auto text = read_file(path);
  const char sep = table_separator(path);
  std::vector<EmbeddingRow> rows;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw ParseError("header", "missing header line");
  ++pos;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::string line = text.substr(pos, nl - pos);
    pos = nl == std::string::npos ? text.size() : nl + 1;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t b = 0;
    while (true) {
      const auto c = line.find(sep, b);
      cells.push_back(line.substr(b, c - b));
      if (c == std::string::npos) break;
      b = c + 1;
    }
    if (cells.size() != 2 + kSpeakerDim) throw ParseError("row", "expected " + std::to_string(2 + kSpeakerDim) + " cells");
    EmbeddingRow r{cells[0], cells[1], {}};
    for (int i = 0; i < kSpeakerDim; ++i) r.embedding.vector[i] = std::stof(cells[2 + i]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace articodec::eval
