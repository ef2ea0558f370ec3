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
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "articodec/core/error.hpp"

namespace articodec::eval {

// Lowercase, drop ASCII punctuation except apostrophes, collapse whitespace.
// Non-ASCII bytes pass through untouched.
inline std::string normalize_text(std::string_view text) {
  std::string out;
  bool space = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      space = true;
      continue;
    }
    if (c < 0x80 && std::ispunct(c) && c != '\'') continue;
    if (space && !out.empty()) out.push_back(' ');
    space = false;
    out.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
  }
  return out;
}

inline std::vector<std::string> words(std::string_view normalized) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < normalized.size()) {
    const auto j = normalized.find(' ', i);
    const auto end = j == std::string_view::npos ? normalized.size() : j;
    if (end > i) out.emplace_back(normalized.substr(i, end - i));
    i = end + 1;
  }
  return out;
}

// Levenshtein distance with unit substitution, deletion and insertion costs.
template <typename Seq>
std::size_t edit_distance(const Seq& ref, const Seq& hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

inline double wer_tokens(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  if (ref.empty()) throw data_error("WER undefined for an empty reference");
  return static_cast<double>(edit_distance(ref, hyp)) / static_cast<double>(ref.size());
}

// Both sides are normalized first.
inline double wer(std::string_view ref, std::string_view hyp) {
  return wer_tokens(words(normalize_text(ref)), words(normalize_text(hyp)));
}

// Characters of the normalized text, spaces included.
inline double cer(std::string_view ref, std::string_view hyp) {
  const auto r = normalize_text(ref), h = normalize_text(hyp);
  if (r.empty()) throw data_error("CER undefined for an empty reference");
  return static_cast<double>(edit_distance(r, h)) / static_cast<double>(r.size());
}

}  // namespace articodec::eval
