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

#include <charconv>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "articodec/core/error.hpp"

namespace articodec {

// Flat `key=value` text. '#' starts a comment line; blank lines are ignored.
// Keys are unique; order of first appearance is kept.
struct KeyValues {
  std::vector<std::pair<std::string, std::string>> entries;

  const std::string* find(std::string_view key) const {
    for (const auto& [k, v] : entries) {
      if (k == key) return &v;
    }
    return nullptr;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    auto line = detail::trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw usage_error("config line " + std::to_string(line_no) + ": expected key=value");
    }
    std::string key(detail::trim(line.substr(0, eq)));
    std::string value(detail::trim(line.substr(eq + 1)));
    if (key.empty()) throw usage_error("config line " + std::to_string(line_no) + ": empty key");
    if (kv.find(key)) throw usage_error("config key '" + key + "' given twice");
    kv.entries.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

// Typed key table. Each binding parses its text into a target field.
class ConfigSchema {
 public:
  template <typename T>
  ConfigSchema& bind(std::string key, T* field) {
    setters_[std::move(key)] = [field](const std::string& k, const std::string& v) { *field = parse<T>(k, v); };
    return *this;
  }

  // Applies every entry; unknown keys are errors.
  void apply(const KeyValues& kv) const {
    for (const auto& [k, v] : kv.entries) {
      const auto it = setters_.find(k);
      if (it == setters_.end()) throw usage_error("unknown config key '" + k + "'");
      it->second(k, v);
    }
  }

  template <typename T>
  static T parse(const std::string& key, const std::string& v) {
    auto bad = [&](const char* type) {
      return usage_error("config key '" + key + "': expected " + type + ", got '" + v + "'");
    };
    if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (v == "true" || v == "1") return true;
      if (v == "false" || v == "0") return false;
      throw bad("true or false");
    } else if constexpr (std::is_same_v<T, std::vector<int>>) {
      std::vector<int> out;
      std::string_view rest(v);
      while (!rest.empty()) {
        const auto c = rest.find(',');
        out.push_back(parse<int>(key, std::string(detail::trim(rest.substr(0, c)))));
        if (c == std::string_view::npos) break;
        rest = rest.substr(c + 1);
      }
      return out;
    } else if constexpr (std::is_floating_point_v<T>) {
      try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw bad("a number");
        return static_cast<T>(d);
      } catch (const std::logic_error&) {
        throw bad("a number");
      }
    } else {
      T out{};
      const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (ec != std::errc() || p != v.data() + v.size()) throw bad("an integer");
      return out;
    }
  }

 private:
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters_;
};

}  // namespace articodec
