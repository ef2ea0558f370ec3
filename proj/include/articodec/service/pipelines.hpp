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
#include <optional>
#include <string>
#include <vector>

#include "articodec/core/features_io.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/wav.hpp"
#include "articodec/eval/external.hpp"
#include "articodec/eval/metrics.hpp"
#include "articodec/eval/report.hpp"
#include "articodec/eval/text.hpp"
#include "articodec/service/manifest.hpp"
#include "articodec/service/stack.hpp"

namespace articodec::service {

inline constexpr const char* kCheckpointFile = "vocoder.ackp";
inline constexpr const char* kAaiMapFile = "aai.aaiw";

// A checkpoint directory holds aai.aaiw and vocoder.ackp, or the trainer's
// latest.ackp when no vocoder.ackp is present.
inline StackPaths stack_paths_in(const fs::path& dir, std::string encoder_asset = {},
                                 std::string tracker = "nccf-viterbi") {
  auto ckpt = dir / kCheckpointFile;
  if (!fs::exists(ckpt) && fs::exists(dir / "latest.ackp")) ckpt = dir / "latest.ackp";
  return {ckpt, dir / kAaiMapFile, std::move(encoder_asset), std::move(tracker)};
}

// Encodes every record to <out>/<id>.artf and <id>.spke; returns the manifest
// with feature_path filled in.
inline Manifest encode_manifest(const Manifest& m, const CodecStack& stack, const fs::path& out_dir) {
  m.validate();
  fs::create_directories(out_dir);
  Manifest out = m;
  for (auto& r : out.records) {
    const auto enc = stack.encode(read_wav(r.audio_path));
    const auto fp = out_dir / (r.utterance_id + ".artf");
    write_features(enc.features, fp);
    write_embedding(enc.embedding, out_dir / (r.utterance_id + ".spke"));
    r.feature_path = fp;
  }
  return out;
}

struct EvalOptions {
  std::string dataset;
  const eval::Scorer* asr = nullptr;
  const eval::Scorer* mos = nullptr;
  const eval::ScoreCache* cache = nullptr;
  int template_clips = 10;
};

struct EvalRun {
  eval::EvalReport report;
  std::optional<double> mos;
};

// Resynthesis evaluation: each utterance is encoded, decoded with its own
// embedding and re-encoded. WER/CER compare the ASR transcript of the
// resynthesis against the manifest transcript, pooled over the corpus. SID
// queries the re-encoded embeddings against templates built from the first
// clips of each speaker's originals.
inline EvalRun evaluate(const Manifest& m, const CodecStack& stack, const EvalOptions& opt) {
  m.validate();
  if (m.records.empty()) throw data_error("manifest is empty");
  EvalRun run;
  auto& rep = run.report;
  rep.dataset = opt.dataset;
  rep.n_utts = m.records.size();

  std::vector<eval::CodingRecoding> scores;
  std::vector<eval::NamedWave> resynth;
  std::vector<eval::LabelledEmbedding> queries;
  std::map<std::string, std::vector<Waveform>> originals;
  for (const auto& r : m.records) {
    const auto w = read_wav(r.audio_path);
    auto& clips = originals[r.speaker_id];
    if (static_cast<int>(clips.size()) < opt.template_clips) clips.push_back(w);
    const auto enc = stack.encode(w);
    const auto audio = stack.synthesize(enc.features, enc.embedding);
    const auto re = stack.encode(audio);
    scores.push_back(eval::coding_recoding(enc.features, enc.embedding, re.features, re.embedding));
    resynth.push_back({r.utterance_id, audio});
    queries.push_back({r.speaker_id, re.embedding});
  }
  rep.coding_recoding = eval::mean_coding_recoding(scores);

  if (originals.size() < 2) {
    rep.skipped.push_back("sid_acc");
  } else {
    std::map<std::string, SpeakerEmbedding> templates;
    for (const auto& [spk, clips] : originals) templates[spk] = stack.speaker_template(clips, opt.template_clips);
    rep.sid_acc = eval::sid_accuracy(templates, queries);
  }

  const bool have_text = std::any_of(m.records.begin(), m.records.end(), [](const auto& r) { return r.transcript.has_value(); });
  if (!opt.asr || !have_text) {
    rep.skipped.push_back("wer");
    rep.skipped.push_back("cer");
  } else {
    const auto asr = eval::score_external(resynth, *opt.asr, opt.cache);
    if (asr.skipped) {
      rep.skipped.push_back("wer");
      rep.skipped.push_back("cer");
    } else {
      std::size_t wedits = 0, wref = 0, cedits = 0, cref = 0;
      for (std::size_t i = 0; i < m.records.size(); ++i) {
        const auto& r = m.records[i];
        if (!r.transcript || !asr.items[i].value) continue;
        const auto ref = eval::normalize_text(*r.transcript), hyp = eval::normalize_text(*asr.items[i].value);
        const auto rw = eval::words(ref), hw = eval::words(hyp);
        if (rw.empty()) continue;
        wedits += eval::edit_distance(rw, hw);
        wref += rw.size();
        cedits += eval::edit_distance(ref, hyp);
        cref += ref.size();
      }
      if (wref == 0) {
        rep.skipped.push_back("wer");
        rep.skipped.push_back("cer");
      } else {
        rep.wer = static_cast<double>(wedits) / static_cast<double>(wref);
        rep.cer = static_cast<double>(cedits) / static_cast<double>(cref);
      }
    }
  }

  if (opt.mos) {
    const auto q = eval::score_external(resynth, *opt.mos, opt.cache);
    double sum = 0;
    std::size_t n = 0;
    for (const auto& it : q.items) {
      if (!it.value) continue;
      try {
        sum += std::stod(*it.value);
        ++n;
      } catch (const std::exception&) {
        warn("quality scorer returned a non-numeric answer for '" + it.id + "'");
      }
    }
    if (q.skipped || n == 0) {
      rep.skipped.push_back("mos");
    } else {
      run.mos = sum / static_cast<double>(n);
    }
  }
  return run;
}

inline nlohmann::json to_json(const EvalRun& run) {
  auto j = eval::to_json(run.report);
  if (run.mos) j["mos"] = *run.mos;
  return j;
}

}  // namespace articodec::service
