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

#include <algorithm>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/wav.hpp"

namespace articodec::service {

namespace fs = std::filesystem;

struct ManifestRecord {
  std::string utterance_id;
  fs::path audio_path;
  std::string speaker_id;
  std::optional<fs::path> feature_path;
  std::optional<std::string> transcript;

  bool operator==(const ManifestRecord&) const = default;
};

struct Manifest {
  std::vector<ManifestRecord> records;

  // Unique ids; with check_files, every referenced file must exist.
  void validate(bool check_files = true) const {
    std::map<std::string, const ManifestRecord*> seen;
    for (const auto& r : records) {
      if (r.utterance_id.empty()) throw data_error("manifest record with empty utterance_id");
      if (r.speaker_id.empty()) throw data_error("utterance '" + r.utterance_id + "' has no speaker_id");
      const auto [it, fresh] = seen.emplace(r.utterance_id, &r);
      if (!fresh) {
        throw data_error("duplicate utterance_id '" + r.utterance_id + "': " + it->second->audio_path.string() +
                         " and " + r.audio_path.string());
      }
      if (check_files) {
        if (!fs::exists(r.audio_path)) throw data_error("audio file not found: " + r.audio_path.string());
        if (r.feature_path && !fs::exists(*r.feature_path)) {
          throw data_error("feature file not found: " + r.feature_path->string());
        }
      }
    }
  }

  // Records grouped by speaker, corpus order kept within each group.
  std::map<std::string, std::vector<const ManifestRecord*>> by_speaker() const {
    std::map<std::string, std::vector<const ManifestRecord*>> m;
    for (const auto& r : records) m[r.speaker_id].push_back(&r);
    return m;
  }
};

inline nlohmann::json to_json(const ManifestRecord& r) {
  nlohmann::json j{{"utterance_id", r.utterance_id}, {"audio_path", r.audio_path.string()}, {"speaker_id", r.speaker_id}};
  if (r.feature_path) j["feature_path"] = r.feature_path->string();
  if (r.transcript) j["transcript"] = *r.transcript;
  return j;
}

inline std::string format_manifest(const Manifest& m) {
  std::string out;
  for (const auto& r : m.records) out += to_json(r).dump() + '\n';
  return out;
}

// JSON Lines; relative paths resolve against `base`.
inline Manifest parse_manifest(std::string_view text, const fs::path& base = {}) {
  Manifest m;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const auto where = "manifest line " + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw data_error(where + e.what());
    }
    auto str = [&](const char* key, bool required) -> std::optional<std::string> {
      if (!j.contains(key)) {
        if (required) throw data_error(where + "missing \"" + key + "\"");
        return std::nullopt;
      }
      if (!j[key].is_string()) throw data_error(where + "\"" + key + "\" must be a string");
      return j[key].get<std::string>();
    };
    auto path = [&](const std::string& p) { return base.empty() || fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    ManifestRecord r;
    r.utterance_id = *str("utterance_id", true);
    r.audio_path = path(*str("audio_path", true));
    r.speaker_id = *str("speaker_id", true);
    if (auto f = str("feature_path", false)) r.feature_path = path(*f);
    r.transcript = str("transcript", false);
    m.records.push_back(std::move(r));
  }
  return m;
}

inline Manifest read_manifest(const fs::path& path) {
  return parse_manifest(read_file(path), path.parent_path());
}

inline void write_manifest(const Manifest& m, const fs::path& path) { write_file_atomic(path, format_manifest(m)); }

enum class Layout { kLibriTtsR, kVctk, kFlat };

inline Layout parse_layout(std::string_view s) {
  if (s == "librittsr") return Layout::kLibriTtsR;
  if (s == "vctk") return Layout::kVctk;
  if (s == "flat") return Layout::kFlat;
  throw usage_error("unknown corpus layout '" + std::string(s) + "' (expected librittsr, vctk or flat)");
}

struct IngestIssue {
  fs::path path;
  std::string error;
};

struct IngestResult {
  Manifest manifest;
  std::vector<IngestIssue> issues;
};

namespace detail {

inline std::string stem_prefix(const std::string& stem) {
  const auto c = stem.find_first_of("_-");
  return c == std::string::npos ? stem : stem.substr(0, c);
}

inline std::optional<std::string> read_transcript(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  auto t = read_file(p);
  while (!t.empty() && (t.back() == '\n' || t.back() == '\r')) t.pop_back();
  return t;
}

}  // namespace detail

// Layout rules:
//   flat       <dir>/*.wav; speaker is the stem up to the first '_' or '-'.
//   vctk       <dir>/**/<speaker>/<utt>.wav; transcript from
//              <dir>/txt/<speaker>/<utt>.txt when present.
//   librittsr  <dir>/**/<speaker>/<chapter>/<speaker>_<chapter>_<...>.wav;
//              transcript from the sibling <stem>.normalized.txt.
// Undecodable files are reported, not fatal. Records come out sorted by path.
inline IngestResult ingest(const fs::path& dir, Layout layout) {
  if (!fs::is_directory(dir)) throw usage_error("not a readable directory: " + dir.string());
  std::vector<fs::path> wavs;
  auto is_wav = [](const fs::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".wav";
  };
  if (layout == Layout::kFlat) {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_regular_file() && is_wav(e.path())) wavs.push_back(e.path());
    }
  } else {
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
      if (e.is_regular_file() && is_wav(e.path())) wavs.push_back(e.path());
    }
  }
  std::sort(wavs.begin(), wavs.end());

  IngestResult out;
  for (const auto& p : wavs) {
    try {
      const auto w = read_wav(p);
      validate_ingest(w);
      if (w.empty()) throw data_error("no samples");
    } catch (const std::exception& e) {
      out.issues.push_back({p, e.what()});
      warn("ingest: skipping " + p.string() + ": " + e.what());
      continue;
    }
    ManifestRecord r;
    r.audio_path = p;
    r.utterance_id = p.stem().string();
    switch (layout) {
      case Layout::kFlat:
        r.speaker_id = detail::stem_prefix(r.utterance_id);
        break;
      case Layout::kVctk:
        r.speaker_id = p.parent_path().filename().string();
        r.transcript = detail::read_transcript(dir / "txt" / r.speaker_id / (r.utterance_id + ".txt"));
        break;
      case Layout::kLibriTtsR:
        r.speaker_id = detail::stem_prefix(r.utterance_id);
        r.transcript = detail::read_transcript(p.parent_path() / (r.utterance_id + ".normalized.txt"));
        break;
    }
    out.manifest.records.push_back(std::move(r));
  }
  if (out.manifest.records.empty()) {
    throw data_error("no valid audio files under " + dir.string() + " (" + std::to_string(out.issues.size()) +
                     " rejected)");
  }
  out.manifest.validate(false);
  return out;
}

}  // namespace articodec::service
