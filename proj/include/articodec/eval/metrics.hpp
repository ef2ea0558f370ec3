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
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/stats.hpp"
#include "articodec/core/types.hpp"

namespace articodec::eval {

inline double pcc(const std::vector<double>& x, const std::vector<double>& y) { return pearson(x, y); }
inline double pcc(const std::vector<float>& x, const std::vector<float>& y) { return pearson(x, y); }

inline double norm(const SpeakerEmbedding& e) {
  double s = 0;
  for (float v : e.vector) s += static_cast<double>(v) * v;
  return std::sqrt(s);
}

inline double cosine_similarity(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
  const double na = norm(a), nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw data_error("cosine similarity of a zero-norm embedding");
  double d = 0;
  for (int i = 0; i < kSpeakerDim; ++i) d += static_cast<double>(a.vector[i]) * b.vector[i];
  return d / (na * nb);
}

struct CodingRecoding {
  double articulation = 0;  // mean of the 12 EMA channel PCCs
  double pitch = 0;         // frames voiced in both
  double loudness = 0;
  double speaker = 0;  // cosine
};

// Similarity between the encoding of an input and the encoding of its
// resynthesis.
inline CodingRecoding coding_recoding(const ArticulatoryFeatures& orig, const SpeakerEmbedding& orig_spk,
                                      const ArticulatoryFeatures& recoded, const SpeakerEmbedding& recoded_spk) {
  std::size_t n = std::min(orig.frames(), recoded.frames());
  if (orig.frames() != recoded.frames()) {
    warn("coding-recoding: length mismatch " + std::to_string(orig.frames()) + " vs " +
         std::to_string(recoded.frames()) + " frames, truncating to " + std::to_string(n));
  }
  if (n < 2) throw data_error("coding-recoding needs at least 2 frames");
  CodingRecoding r;
  std::vector<double> a(n), b(n);
  for (int c = 0; c < kEmaChannels; ++c) {
    for (std::size_t t = 0; t < n; ++t) {
      a[t] = orig.channel(c, t);
      b[t] = recoded.channel(c, t);
    }
    r.articulation += pearson(a, b);
  }
  r.articulation /= kEmaChannels;

  std::vector<double> pa, pb;
  for (std::size_t t = 0; t < n; ++t) {
    if (orig.source.f0[t] > 0 && recoded.source.f0[t] > 0) {
      pa.push_back(orig.source.f0[t]);
      pb.push_back(recoded.source.f0[t]);
    }
  }
  if (pa.size() < 2) {
    warn("coding-recoding: fewer than 2 frames voiced in both, pitch scored 0");
  } else {
    r.pitch = pearson(pa, pb);
  }
  for (std::size_t t = 0; t < n; ++t) {
    a[t] = orig.source.loudness[t];
    b[t] = recoded.source.loudness[t];
  }
  r.loudness = pearson(a, b);
  r.speaker = cosine_similarity(orig_spk, recoded_spk);
  return r;
}

// Nearest template by cosine. Ties go to the smallest id (map order).
inline std::string few_shot_sid(const std::map<std::string, SpeakerEmbedding>& templates,
                                const SpeakerEmbedding& query) {
  if (templates.empty()) throw usage_error("speaker identification needs at least one template");
  if (norm(query) == 0.0) throw data_error("query embedding has zero norm");
  const std::string* best = nullptr;
  double best_sim = 0;
  for (const auto& [id, t] : templates) {
    if (norm(t) == 0.0) throw data_error("template '" + id + "' has zero norm");
    const double s = cosine_similarity(t, query);
    if (!best || s > best_sim) {
      best = &id;
      best_sim = s;
    }
  }
  return *best;
}

struct LabelledEmbedding {
  std::string label;
  SpeakerEmbedding embedding;
};

inline double sid_accuracy(const std::map<std::string, SpeakerEmbedding>& templates,
                           const std::vector<LabelledEmbedding>& queries) {
  if (queries.empty()) throw usage_error("speaker identification needs at least one query");
  std::size_t hit = 0;
  for (const auto& q : queries) hit += few_shot_sid(templates, q.embedding) == q.label;
  return static_cast<double>(hit) / static_cast<double>(queries.size());
}

}  // namespace articodec::eval
