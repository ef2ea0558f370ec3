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

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "articodec/eval/metrics.hpp"

namespace articodec::eval {

struct EvalReport {
  std::string dataset;
  std::size_t n_utts = 0;
  std::optional<double> wer;
  std::optional<double> cer;
  std::optional<CodingRecoding> coding_recoding;
  std::optional<double> sid_acc;
  std::vector<std::string> skipped;
};

// Absent metrics serialize as null.
inline nlohmann::json to_json(const EvalReport& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["dataset"] = r.dataset;
  j["n_utts"] = r.n_utts;
  j["wer"] = opt(r.wer);
  j["cer"] = opt(r.cer);
  if (r.coding_recoding) {
    j["coding_recoding"] = {{"articulation", r.coding_recoding->articulation},
                            {"pitch", r.coding_recoding->pitch},
                            {"loudness", r.coding_recoding->loudness},
                            {"speaker", r.coding_recoding->speaker}};
  } else {
    j["coding_recoding"] = nullptr;
  }
  j["sid_acc"] = opt(r.sid_acc);
  j["skipped"] = r.skipped;
  return j;
}

// Utterance-level scores averaged field by field.
inline CodingRecoding mean_coding_recoding(const std::vector<CodingRecoding>& v) {
  if (v.empty()) throw usage_error("no coding-recoding scores to average");
  CodingRecoding m;
  for (const auto& r : v) {
    m.articulation += r.articulation;
    m.pitch += r.pitch;
    m.loudness += r.loudness;
    m.speaker += r.speaker;
  }
  const auto n = static_cast<double>(v.size());
  m.articulation /= n;
  m.pitch /= n;
  m.loudness /= n;
  m.speaker /= n;
  return m;
}

}  // namespace articodec::eval
