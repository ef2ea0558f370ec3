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

#include <memory>
#include <string>

#include <httplib.h>

#include "articodec/core/log.hpp"
#include "articodec/service/api.hpp"

namespace articodec::service {

// Base64 inflates by 4/3 and the wav header is small; leave headroom for
// JSON around a maximum-length float32 clip.
inline std::size_t max_body_bytes(double max_duration_s) {
  return static_cast<std::size_t>(max_duration_s * 48000.0 * 4.0 * 4.0 / 3.0) + (1u << 20);
}

// Binds the /v1 routes of `service` onto an httplib server.
inline std::unique_ptr<httplib::Server> make_http_server(std::shared_ptr<const CodecService> service, int threads = 4) {
  auto srv = std::make_unique<httplib::Server>();
  srv->new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<std::size_t>(threads)); };
  srv->set_payload_max_length(max_body_bytes(service->max_duration_s()));
  auto route = [service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service->handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  for (const char* p : {"/v1/health", "/v1/speakers"}) srv->Get(p, route);
  for (const char* p : {"/v1/encode", "/v1/synthesize", "/v1/convert", "/v1/speakers", "/v1/features/inspect",
                        "/v1/features/pack"}) {
    srv->Post(p, route);
  }
  srv->set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const std::string code = res.status == 413 ? "audio_too_long" : res.status == 404 ? "not_found" : "http_error";
    res.set_content(error_body(code, "HTTP " + std::to_string(res.status) + " for " + req.method + " " + req.path).dump(),
                    "application/json");
  });
  return srv;
}

}  // namespace articodec::service
