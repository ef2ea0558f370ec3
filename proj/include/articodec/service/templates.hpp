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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "articodec/control/manipulate.hpp"
#include "articodec/core/binary_io.hpp"
#include "articodec/service/stack.hpp"

namespace articodec::service {

struct SpeakerTemplate {
  std::string speaker_id;
  SpeakerEmbedding embedding;
  control::PitchStats pitch;
  int n_clips = 0;
};

class DuplicateSpeaker : public Error {
 public:
  explicit DuplicateSpeaker(const std::string& id)
      : Error(ErrorKind::kUsage, "speaker '" + id + "' is already registered"), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

// Embedding from the first min(k, n) clips concatenated; pitch statistics
// from the voiced frames of those same clips.
inline SpeakerTemplate build_template(const CodecStack& stack, const std::string& id, const std::vector<Waveform>& clips,
                                      int k = 10) {
  if (id.empty()) throw usage_error("speaker id is empty");
  if (clips.empty()) throw usage_error("speaker '" + id + "': no clips given");
  if (k < 1) throw usage_error("template clip count must be >= 1");
  SpeakerTemplate t;
  t.speaker_id = id;
  t.n_clips = static_cast<int>(std::min<std::size_t>(k, clips.size()));
  const std::vector<Waveform> used(clips.begin(), clips.begin() + t.n_clips);
  t.embedding = stack.speaker_template(used, t.n_clips);
  std::vector<float> f0;
  for (const auto& c : used) {
    const auto src = source::extract_source(CodecStack::to_internal(c), stack.tracker(), Mode::kInference);
    f0.insert(f0.end(), src.f0.begin(), src.f0.end());
  }
  t.pitch = control::voiced_pitch_stats(f0);
  return t;
}

inline nlohmann::json to_json(const SpeakerTemplate& t) {
  return {{"speaker_id", t.speaker_id},
          {"pitch_mean", t.pitch.mean},
          {"pitch_std", t.pitch.std},
          {"n_clips", t.n_clips},
          {"embedding", std::vector<float>(t.embedding.vector.begin(), t.embedding.vector.end())}};
}

inline SpeakerTemplate template_from_json(const nlohmann::json& j) {
  SpeakerTemplate t;
  t.speaker_id = j.at("speaker_id").get<std::string>();
  t.pitch.mean = j.at("pitch_mean").get<double>();
  t.pitch.std = j.at("pitch_std").get<double>();
  t.n_clips = j.at("n_clips").get<int>();
  const auto e = j.at("embedding").get<std::vector<float>>();
  if (e.size() != kSpeakerDim) throw data_error("template '" + t.speaker_id + "': embedding is not 64-d");
  std::copy(e.begin(), e.end(), t.embedding.vector.begin());
  return t;
}

// Speaker templates persisted as one JSON file, rewritten atomically on every
// change. Thread-safe.
class TemplateStore {
 public:
  TemplateStore() = default;  // in-memory only
  explicit TemplateStore(std::filesystem::path file) : file_(std::move(file)) {
    if (!file_->empty() && std::filesystem::exists(*file_)) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(read_file(*file_));
        for (const auto& e : j.at("speakers")) {
          auto t = template_from_json(e);
          entries_.emplace(t.speaker_id, std::move(t));
        }
      } catch (const nlohmann::json::exception& e) {
        throw data_error("template store " + file_->string() + ": " + e.what());
      }
    }
  }

  void add(SpeakerTemplate t) {
    std::lock_guard lock(mu_);
    if (entries_.count(t.speaker_id)) throw DuplicateSpeaker(t.speaker_id);
    entries_.emplace(t.speaker_id, std::move(t));
    persist_locked();
  }

  std::optional<SpeakerTemplate> find(const std::string& id) const {
    std::lock_guard lock(mu_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& id) const {
    std::lock_guard lock(mu_);
    return entries_.count(id) > 0;
  }

  std::vector<SpeakerTemplate> list() const {
    std::lock_guard lock(mu_);
    std::vector<SpeakerTemplate> out;
    for (const auto& [id, t] : entries_) out.push_back(t);
    return out;
  }

  std::map<std::string, SpeakerEmbedding> embeddings() const {
    std::lock_guard lock(mu_);
    std::map<std::string, SpeakerEmbedding> out;
    for (const auto& [id, t] : entries_) out.emplace(id, t.embedding);
    return out;
  }

 private:
  void persist_locked() const {
    if (!file_ || file_->empty()) return;
    nlohmann::json j;
    j["speakers"] = nlohmann::json::array();
    for (const auto& [id, t] : entries_) j["speakers"].push_back(to_json(t));
    if (file_->has_parent_path()) std::filesystem::create_directories(file_->parent_path());
    write_file_atomic(*file_, j.dump(1));
  }

  std::optional<std::filesystem::path> file_;
  mutable std::mutex mu_;
  std::map<std::string, SpeakerTemplate> entries_;
};

}  // namespace articodec::service
