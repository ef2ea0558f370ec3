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

#include <cstdlib>
#include <filesystem>
#include <string>

#include "articodec/core/binary_io.hpp"
#include "articodec/core/digest.hpp"
#include "articodec/core/kv_config.hpp"
#include "articodec/service/stack.hpp"

namespace articodec::service {

inline constexpr int kDefaultPort = 8572;

// Asset and cache root: $ARTICODEC_HOME, else ~/.articodec, else ./.articodec.
inline std::filesystem::path articodec_home() {
  if (const char* h = std::getenv("ARTICODEC_HOME"); h && *h) return h;
  if (const char* h = std::getenv("HOME"); h && *h) return std::filesystem::path(h) / ".articodec";
  return ".articodec";
}

struct ServiceConfig {
  std::string home;  // empty: articodec_home()
  std::string host = "127.0.0.1";
  int port = kDefaultPort;
  double max_duration_s = 60.0;
  int threads = 4;
  // Relative paths resolve against home.
  std::string checkpoint = "vocoder.ackp";
  std::string aai_map = "aai.aaiw";
  std::string encoder_asset;
  std::string tracker = "nccf-viterbi";
  std::string templates = "templates.json";
  std::string cache_dir = "cache";

  std::filesystem::path home_dir() const { return home.empty() ? articodec_home() : std::filesystem::path(home); }
  std::filesystem::path resolve(const std::string& p) const {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : home_dir() / q;
  }

  void validate() const {
    if (port < 0 || port > 65535) throw usage_error("port must be in [0, 65535]");
    if (!(max_duration_s > 0)) throw usage_error("max_duration_s must be positive");
    if (threads < 1) throw usage_error("threads must be >= 1");
  }

  StackPaths stack_paths() const { return {resolve(checkpoint), resolve(aai_map), encoder_asset, tracker}; }

  std::string dump() const {
    std::string s;
    auto line = [&](const char* k, const std::string& v) { s += std::string(k) + "=" + v + "\n"; };
    line("home", home_dir().string());
    line("host", host);
    line("port", std::to_string(port));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", max_duration_s);
    line("max_duration_s", buf);
    line("threads", std::to_string(threads));
    line("checkpoint", resolve(checkpoint).string());
    line("aai_map", resolve(aai_map).string());
    line("encoder_asset", encoder_asset);
    line("tracker", tracker);
    line("templates", resolve(templates).string());
    line("cache_dir", resolve(cache_dir).string());
    return s;
  }

  std::string hash() const { return sha256_hex(dump()); }
};

inline ConfigSchema config_schema(ServiceConfig& c) {
  ConfigSchema s;
  s.bind("home", &c.home)
      .bind("host", &c.host)
      .bind("port", &c.port)
      .bind("max_duration_s", &c.max_duration_s)
      .bind("threads", &c.threads)
      .bind("checkpoint", &c.checkpoint)
      .bind("aai_map", &c.aai_map)
      .bind("encoder_asset", &c.encoder_asset)
      .bind("tracker", &c.tracker)
      .bind("templates", &c.templates)
      .bind("cache_dir", &c.cache_dir);
  return s;
}

inline ServiceConfig parse_service_config(std::string_view text) {
  ServiceConfig c;
  config_schema(c).apply(parse_key_values(text));
  c.validate();
  return c;
}

inline ServiceConfig load_service_config(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw usage_error("config file not found: " + path.string());
  return parse_service_config(read_file(path));
}

}  // namespace articodec::service
