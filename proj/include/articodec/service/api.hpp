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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "articodec/control/convert.hpp"
#include "articodec/control/manipulate.hpp"
#include "articodec/core/digest.hpp"
#include "articodec/core/features_io.hpp"
#include "articodec/core/wav.hpp"
#include "articodec/service/stack.hpp"
#include "articodec/service/templates.hpp"

namespace articodec::service {

using nlohmann::json;

struct ApiResponse {
  int status = 200;
  json body;
};

// Carries an HTTP status and a machine-readable code.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

inline json error_body(const std::string& code, const std::string& message) {
  return {{"error", {{"code", code}, {"message", message}}}};
}

namespace wire {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ApiError(400, "missing_field", std::string("missing \"") + key + "\"");
  return j.at(key);
}

inline std::string text(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_string()) throw ApiError(400, "bad_field", std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

inline Waveform audio(const json& j, const char* key, double max_duration_s) {
  Waveform w;
  try {
    w = decode_wav(base64_decode(text(j, key)));
    validate_ingest(w);
  } catch (const ApiError&) {
    throw;
  } catch (const std::exception& e) {
    throw ApiError(400, "undecodable_audio", std::string("\"") + key + "\": " + e.what());
  }
  if (w.empty()) throw ApiError(400, "undecodable_audio", std::string("\"") + key + "\" has no samples");
  if (w.duration() > max_duration_s) {
    throw ApiError(413, "audio_too_long",
                   "clip is " + std::to_string(w.duration()) + " s, limit " + std::to_string(max_duration_s) + " s");
  }
  return w;
}

inline ArticulatoryFeatures features(const json& j, const char* key) {
  try {
    return decode_features(base64_decode(text(j, key)));
  } catch (const ApiError&) {
    throw;
  } catch (const std::exception& e) {
    throw ApiError(400, "bad_features", std::string("\"") + key + "\": " + e.what());
  }
}

inline SpeakerEmbedding embedding(const json& j, const char* key) {
  const auto& v = field(j, key);
  if (!v.is_array() || v.size() != kSpeakerDim) {
    throw ApiError(400, "bad_embedding", std::string("\"") + key + "\" must be an array of 64 numbers");
  }
  SpeakerEmbedding e;
  for (int i = 0; i < kSpeakerDim; ++i) {
    if (!v[i].is_number()) throw ApiError(400, "bad_embedding", "embedding entries must be numbers");
    e.vector[i] = v[i].get<float>();
  }
  if (!e.finite()) throw ApiError(400, "bad_embedding", "embedding has non-finite entries");
  return e;
}

inline json embedding_json(const SpeakerEmbedding& e) { return std::vector<float>(e.vector.begin(), e.vector.end()); }

inline std::string wav_b64(const Waveform& w) { return base64_encode(encode_wav(w, WavEncoding::kFloat32)); }

}  // namespace wire

// Request handlers behind the /v1 API, independent of the transport. The
// stack is an immutable snapshot; set_stack swaps it atomically.
class CodecService {
 public:
  CodecService(std::shared_ptr<const CodecStack> stack, std::shared_ptr<TemplateStore> templates,
               double max_duration_s = 60.0)
      : stack_(std::move(stack)),
        templates_(templates ? std::move(templates) : std::make_shared<TemplateStore>()),
        max_duration_s_(max_duration_s) {}

  void set_stack(std::shared_ptr<const CodecStack> s) {
    std::lock_guard lock(mu_);
    stack_ = std::move(s);
  }
  std::shared_ptr<const CodecStack> stack() const {
    std::lock_guard lock(mu_);
    return stack_;
  }
  TemplateStore& templates() { return *templates_; }
  double max_duration_s() const { return max_duration_s_; }

  // Routes one request; never throws.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body) const {
    try {
      if (method == "GET" && path == "/v1/health") return health();
      if (method == "GET" && path == "/v1/speakers") return list_speakers();
      json req;
      if (method == "POST") {
        try {
          req = json::parse(body);
        } catch (const json::exception& e) {
          throw ApiError(400, "bad_json", std::string("request body is not JSON: ") + e.what());
        }
        if (!req.is_object()) throw ApiError(400, "bad_json", "request body must be a JSON object");
        if (path == "/v1/encode") return encode(req);
        if (path == "/v1/synthesize") return synthesize(req);
        if (path == "/v1/convert") return convert(req);
        if (path == "/v1/speakers") return register_speaker(req);
        if (path == "/v1/features/inspect") return inspect(req);
        if (path == "/v1/features/pack") return pack(req);
      }
      throw ApiError(404, "not_found", "no route for " + method + " " + path);
    } catch (const ApiError& e) {
      return {e.status(), error_body(e.code(), e.what())};
    } catch (const Error& e) {
      const int status = e.kind() == ErrorKind::kMissingAsset ? 503 : 422;
      return {status, error_body(e.kind() == ErrorKind::kMissingAsset ? "missing_asset" : "invalid_request", e.what())};
    } catch (const std::exception& e) {
      return {500, error_body("internal", e.what())};
    }
  }

  ApiResponse health() const {
    const auto s = stack();
    return {200,
            {{"status", "ok"},
             {"stack_loaded", static_cast<bool>(s)},
             {"config_hash", s ? s->config_hash() : std::string()},
             {"max_duration_s", max_duration_s_}}};
  }

  ApiResponse encode(const json& req) const {
    const auto s = require_stack();
    const auto w = wire::audio(req, "audio", max_duration_s_);
    const auto r = s->encode(w);
    return {200,
            {{"features", base64_encode(encode_features(r.features))},
             {"frames", r.features.frames()},
             {"rate", kFeatureRate},
             {"periodicity", r.features.source.periodicity},
             {"speaker_embedding", wire::embedding_json(r.embedding)},
             {"config_hash", s->config_hash()}}};
  }

  ApiResponse synthesize(const json& req) const {
    const auto s = require_stack();
    auto f = wire::features(req, "features");
    const auto spk = wire::embedding(req, "speaker_embedding");
    if (req.contains("edits")) f = apply_edits(f, req.at("edits"));
    if (f.frames() == 0) throw ApiError(422, "invalid_features", "cannot synthesize zero frames");
    const auto audio = s->synthesize(f, spk);
    return {200,
            {{"audio", wire::wav_b64(audio)},
             {"sample_rate", audio.sample_rate},
             {"features", base64_encode(encode_features(f))},
             {"frames", f.frames()}}};
  }

  ApiResponse convert(const json& req) const {
    const auto s = require_stack();
    const auto w = wire::audio(req, "audio", max_duration_s_);
    bool p_rescale = true;
    if (req.contains("p_rescale")) {
      if (!req["p_rescale"].is_boolean()) throw ApiError(400, "bad_field", "\"p_rescale\" must be a boolean");
      p_rescale = req["p_rescale"].get<bool>();
    }
    SpeakerEmbedding target;
    std::optional<control::PitchStats> pitch;
    if (req.contains("target_speaker_id")) {
      const auto id = wire::text(req, "target_speaker_id");
      const auto t = templates_->find(id);
      if (!t) throw ApiError(404, "unknown_speaker", "no template for speaker '" + id + "'");
      target = t->embedding;
      pitch = t->pitch;
    } else if (req.contains("target_embedding")) {
      target = wire::embedding(req, "target_embedding");
    } else {
      throw ApiError(400, "missing_field", "need \"target_speaker_id\" or \"target_embedding\"");
    }
    if (req.contains("target_pitch")) pitch = pitch_stats(req.at("target_pitch"));
    if (p_rescale && !pitch) {
      throw ApiError(422, "invalid_request", "p_rescale needs target pitch statistics (\"target_pitch\")");
    }
    const auto c = control::convert_voice(w, target, pitch, *s, p_rescale);
    return {200,
            {{"audio", wire::wav_b64(c.audio)},
             {"sample_rate", c.audio.sample_rate},
             {"features", base64_encode(encode_features(c.features))},
             {"frames", c.features.frames()}}};
  }

  ApiResponse list_speakers() const {
    json out = json::array();
    for (const auto& t : templates_->list()) {
      out.push_back({{"speaker_id", t.speaker_id},
                     {"pitch_mean", t.pitch.mean},
                     {"pitch_std", t.pitch.std},
                     {"n_clips", t.n_clips}});
    }
    return {200, {{"speakers", out}}};
  }

  ApiResponse register_speaker(const json& req) const {
    const auto s = require_stack();
    const auto id = wire::text(req, "speaker_id");
    const auto& clips = wire::field(req, "clips");
    if (!clips.is_array()) throw ApiError(400, "bad_field", "\"clips\" must be an array of base64 wav strings");
    if (clips.empty()) throw ApiError(400, "no_clips", "at least one clip is required");
    int k = 10;
    if (req.contains("k")) {
      if (!req["k"].is_number_integer() || req["k"].get<int>() < 1) {
        throw ApiError(400, "bad_field", "\"k\" must be a positive integer");
      }
      k = req["k"].get<int>();
    }
    if (templates_->contains(id)) throw ApiError(409, "duplicate_speaker", "speaker '" + id + "' already registered");
    std::vector<Waveform> waves;
    for (std::size_t i = 0; i < clips.size(); ++i) {
      const json one{{"audio", clips[i]}};
      waves.push_back(wire::audio(one, "audio", max_duration_s_));
    }
    SpeakerTemplate t = build_template(*s, id, waves, k);
    try {
      templates_->add(t);
    } catch (const DuplicateSpeaker& e) {
      throw ApiError(409, "duplicate_speaker", e.what());
    }
    return {201,
            {{"speaker_id", t.speaker_id},
             {"pitch_mean", t.pitch.mean},
             {"pitch_std", t.pitch.std},
             {"n_clips", t.n_clips},
             {"speaker_embedding", wire::embedding_json(t.embedding)}}};
  }

  // .artf payload to named channel arrays, for plotting.
  ApiResponse inspect(const json& req) const {
    const auto f = wire::features(req, "features");
    json ch = json::object();
    for (int c = 0; c < kFeatureChannels; ++c) {
      std::vector<float> v(f.frames());
      for (std::size_t t = 0; t < f.frames(); ++t) v[t] = f.channel(c, t);
      ch[std::string(kChannelNames[c])] = v;
    }
    return {200, {{"frames", f.frames()}, {"rate", kFeatureRate}, {"channels", ch}, {"periodicity", f.source.periodicity}}};
  }

  // Named channel arrays back to an .artf payload.
  ApiResponse pack(const json& req) const {
    const auto& ch = wire::field(req, "channels");
    if (!ch.is_object()) throw ApiError(400, "bad_field", "\"channels\" must be an object");
    std::optional<std::size_t> n;
    ArticulatoryFeatures f;
    for (int c = 0; c < kFeatureChannels; ++c) {
      const std::string name(kChannelNames[c]);
      if (!ch.contains(name) || !ch[name].is_array()) {
        throw ApiError(400, "bad_field", "channel \"" + name + "\" missing or not an array");
      }
      const auto v = ch[name].get<std::vector<float>>();
      if (!n) {
        n = v.size();
        f.ema.values.resize(kEmaChannels, static_cast<Eigen::Index>(*n));
        f.source.f0.resize(*n);
        f.source.loudness.resize(*n);
        f.source.periodicity.assign(*n, 0.0f);
      }
      if (v.size() != *n) throw ApiError(422, "invalid_features", "channel \"" + name + "\" has a different length");
      for (std::size_t t = 0; t < *n; ++t) f.channel(c, t) = v[t];
    }
    if (req.contains("periodicity")) {
      const auto p = req["periodicity"].get<std::vector<float>>();
      if (p.size() != *n) throw ApiError(422, "invalid_features", "periodicity has a different length");
      f.source.periodicity = p;
    }
    try {
      return {200, {{"features", base64_encode(encode_features(f))}, {"frames", f.frames()}}};
    } catch (const Error& e) {
      throw ApiError(422, "invalid_features", e.what());
    }
  }

  // Edits run in order. Any invalid parameter is a 422 naming the edit.
  ArticulatoryFeatures apply_edits(ArticulatoryFeatures f, const json& edits) const {
    if (!edits.is_array()) throw ApiError(400, "bad_field", "\"edits\" must be an array");
    for (std::size_t i = 0; i < edits.size(); ++i) {
      const auto where = "edit " + std::to_string(i) + ": ";
      try {
        const auto& e = edits[i];
        if (!e.is_object() || !e.contains("op") || !e["op"].is_string()) {
          throw ApiError(422, "invalid_edit", "needs a string \"op\"");
        }
        const auto op = e["op"].get<std::string>();
        const json params = e.value("params", json::object());
        if (op == "interpolate") {
          const auto other = wire::features(params, "other");
          const double alpha = number(params, "alpha");
          const auto mask = control::parse_channel_mask(params.value("channels", std::string("all")));
          f = control::interpolate(f, other, alpha, mask);
        } else if (op == "shift") {
          f = control::shift_channel(f, wire::text(params, "channel"), number(params, "ms"));
        } else if (op == "rescale_pitch") {
          control::PitchStats s;
          if (params.contains("speaker_id")) {
            const auto id = wire::text(params, "speaker_id");
            const auto t = templates_->find(id);
            if (!t) throw ApiError(404, "unknown_speaker", "no template for speaker '" + id + "'");
            s = t->pitch;
          } else {
            s = pitch_stats(params);
          }
          f.source = control::rescale_pitch(f.source, s.mean, s.std);
        } else {
          throw ApiError(422, "invalid_edit", "unknown op '" + op + "'");
        }
      } catch (const ApiError& e) {
        if (e.status() == 404) throw;
        throw ApiError(422, "invalid_edit", where + e.what());
      } catch (const Error& e) {
        throw ApiError(422, "invalid_edit", where + e.what());
      }
    }
    return f;
  }

 private:
  std::shared_ptr<const CodecStack> require_stack() const {
    auto s = stack();
    if (!s) throw ApiError(503, "stack_not_loaded", "codec stack is not loaded");
    return s;
  }

  static double number(const json& j, const char* key) {
    const auto& v = wire::field(j, key);
    if (!v.is_number()) throw ApiError(422, "invalid_edit", std::string("\"") + key + "\" must be a number");
    return v.get<double>();
  }

  static control::PitchStats pitch_stats(const json& j) {
    control::PitchStats s{number(j, "mean"), number(j, "std")};
    if (!(s.mean > 0) || !(s.std >= 0)) throw ApiError(422, "invalid_request", "pitch mean must be > 0 and std >= 0");
    return s;
  }

  mutable std::mutex mu_;
  std::shared_ptr<const CodecStack> stack_;
  std::shared_ptr<TemplateStore> templates_;
  double max_duration_s_;
};

}  // namespace articodec::service
