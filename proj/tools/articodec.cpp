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

// articodec command-line front end.

#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "articodec/alignment/affine.hpp"
#include "articodec/analysis/encoder.hpp"
#include "articodec/analysis/linear_map.hpp"
#include "articodec/analysis/probe.hpp"
#include "articodec/control/convert.hpp"
#include "articodec/control/manipulate.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/features_io.hpp"
#include "articodec/core/wav.hpp"
#include "articodec/eval/export.hpp"
#include "articodec/eval/external.hpp"
#include "articodec/service/api.hpp"
#include "articodec/service/config.hpp"
#include "articodec/service/http.hpp"
#include "articodec/service/manifest.hpp"
#include "articodec/service/pipelines.hpp"
#include "articodec/service/stack.hpp"
#include "articodec/service/templates.hpp"
#include "articodec/speaker/encoder.hpp"
#include "articodec/vocoder/config_io.hpp"
#include "articodec/vocoder/trainer.hpp"

namespace ac = articodec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Globals {
  std::string home;
  std::string ckpt;
  std::string encoder_asset;
  std::string tracker = "nccf-viterbi";
  bool verbose = false;
  bool quiet = false;
};

fs::path home_dir(const Globals& g) { return g.home.empty() ? ac::service::articodec_home() : fs::path(g.home); }

fs::path ckpt_dir(const Globals& g) { return g.ckpt.empty() ? home_dir(g) : fs::path(g.ckpt); }

std::shared_ptr<const ac::service::CodecStack> load_stack(const Globals& g) {
  const auto dir = ckpt_dir(g);
  auto paths = ac::service::stack_paths_in(dir, g.encoder_asset, g.tracker);
  if (!fs::exists(paths.checkpoint) || !fs::exists(paths.aai_map)) {
    throw ac::missing_asset("no model assets in " + dir.string() + " (need " + ac::service::kCheckpointFile + " and " +
                            ac::service::kAaiMapFile + "); run 'articodec train' or 'articodec init'");
  }
  return ac::service::load_codec_stack(paths);
}

// "220:20" -> mean 220 Hz, std 20 Hz.
ac::control::PitchStats parse_pitch(const std::string& s) {
  const auto c = s.find(':');
  if (c == std::string::npos) throw ac::usage_error("pitch target must look like MEAN:STD, got '" + s + "'");
  try {
    ac::control::PitchStats p{std::stod(s.substr(0, c)), std::stod(s.substr(c + 1))};
    if (!(p.mean > 0) || !(p.std >= 0)) throw ac::usage_error("pitch mean must be > 0 and std >= 0");
    return p;
  } catch (const std::logic_error&) {
    throw ac::usage_error("pitch target must look like MEAN:STD, got '" + s + "'");
  }
}

// "0..24", "3,5,9" or a mix.
std::vector<int> parse_layers(const std::string& s) {
  std::vector<int> out;
  std::size_t b = 0;
  while (b <= s.size()) {
    const auto c = s.find(',', b);
    const auto part = s.substr(b, c == std::string::npos ? std::string::npos : c - b);
    try {
      const auto dots = part.find("..");
      if (dots == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dots)), hi = std::stoi(part.substr(dots + 2));
        if (hi < lo) throw ac::usage_error("empty layer range '" + part + "'");
        for (int l = lo; l <= hi; ++l) out.push_back(l);
      }
    } catch (const std::logic_error&) {
      throw ac::usage_error("bad layer list '" + s + "'");
    }
    if (c == std::string::npos) break;
    b = c + 1;
  }
  return out;
}

void say(const Globals& g, const std::string& msg) {
  if (!g.quiet) std::cout << msg << '\n';
}

// ---- subcommands ----

void cmd_init(const Globals& g, const std::string& encoder_id, const std::string& preset, const std::string& out,
              std::uint64_t seed) {
  auto cfg = ac::vocoder::parse_vocoder_config("preset=" + preset + "\n");
  const auto encoder = ac::analysis::make_encoder(encoder_id, g.encoder_asset);
  const auto assets = ac::service::make_placeholder_assets(*encoder, cfg, -1, seed);
  const fs::path dir = out.empty() ? ckpt_dir(g) : fs::path(out);
  fs::create_directories(dir);
  ac::vocoder::save_checkpoint(dir / ac::service::kCheckpointFile, assets.checkpoint);
  ac::analysis::write_linear_map(dir / ac::service::kAaiMapFile, assets.aai);
  spdlog::warn("wrote untrained placeholder assets; output audio will not be speech until trained");
  say(g, "initialized " + dir.string() + " (encoder " + encoder_id + ", preset " + preset + ")");
}

void cmd_encode(const Globals& g, const std::string& wav, const std::string& out, bool train_mode,
                const std::string& spk_out) {
  const auto stack = load_stack(g);
  const auto r = stack->encode(ac::read_wav(wav), train_mode ? ac::Mode::kTrain : ac::Mode::kInference);
  ac::write_features(r.features, out);
  if (!spk_out.empty()) ac::write_embedding(r.embedding, spk_out);
  say(g, "encoded " + std::to_string(r.features.frames()) + " frames -> " + out);
}

void cmd_synth(const Globals& g, const std::string& feats, const std::string& spk, const std::string& out) {
  const auto stack = load_stack(g);
  const auto audio = stack->synthesize(ac::read_features(feats), ac::read_embedding(spk));
  ac::write_wav(audio, out);
  say(g, "wrote " + std::to_string(audio.size()) + " samples -> " + out);
}

void cmd_speaker_embed(const Globals& g, const std::vector<std::string>& wavs, const std::string& out, int k,
                       const std::string& register_id) {
  const auto stack = load_stack(g);
  std::vector<ac::Waveform> clips;
  for (const auto& w : wavs) clips.push_back(ac::read_wav(w));
  if (!register_id.empty()) {
    ac::service::ServiceConfig sc;
    sc.home = home_dir(g).string();
    ac::service::TemplateStore store(sc.resolve(sc.templates));
    const auto t = ac::service::build_template(*stack, register_id, clips, k);
    store.add(t);
    if (!out.empty()) ac::write_embedding(t.embedding, out);
    say(g, "registered speaker " + register_id + " (pitch " + std::to_string(t.pitch.mean) + " +- " +
               std::to_string(t.pitch.std) + " Hz)");
    return;
  }
  if (out.empty()) throw ac::usage_error("speaker-embed needs -o or --register");
  ac::write_embedding(stack->speaker_template(clips, k), out);
  say(g, "speaker embedding from " + std::to_string(std::min<std::size_t>(k, clips.size())) + " clip(s) -> " + out);
}

void cmd_convert(const Globals& g, const std::string& wav, const std::string& target_spk, const std::string& target_id,
                 const std::string& target_pitch, bool no_p_rescale, const std::string& out) {
  const auto stack = load_stack(g);
  ac::SpeakerEmbedding target;
  std::optional<ac::control::PitchStats> pitch;
  if (!target_id.empty()) {
    ac::service::ServiceConfig sc;
    sc.home = home_dir(g).string();
    const ac::service::TemplateStore store(sc.resolve(sc.templates));
    const auto t = store.find(target_id);
    if (!t) throw ac::usage_error("no registered speaker '" + target_id + "'");
    target = t->embedding;
    pitch = t->pitch;
  } else if (!target_spk.empty()) {
    target = ac::read_embedding(target_spk);
  } else {
    throw ac::usage_error("convert needs --target-spk or --target-speaker");
  }
  if (!target_pitch.empty()) pitch = parse_pitch(target_pitch);
  const auto c = ac::control::convert_voice(ac::read_wav(wav), target, pitch, *stack, !no_p_rescale);
  ac::write_wav(c.audio, out);
  say(g, "converted -> " + out);
}

void cmd_manip_interp(const Globals& g, const std::string& a, const std::string& b, double alpha,
                      const std::string& channels, const std::string& align_file, const std::string& out) {
  auto fa = ac::read_features(a), fb = ac::read_features(b);
  if (!align_file.empty()) {
    std::tie(fa, fb) = ac::control::align_frames(fa, fb, ac::control::parse_frame_alignment(ac::read_file(align_file)));
  }
  const auto r = ac::control::interpolate(fa, fb, alpha, ac::control::parse_channel_mask(channels));
  ac::write_features(r, out);
  say(g, "interpolated " + std::to_string(r.frames()) + " frames -> " + out);
}

void cmd_manip_shift(const Globals& g, const std::string& in, const std::string& channel, double ms,
                     const std::string& out) {
  ac::write_features(ac::control::shift_channel(ac::read_features(in), channel, ms), out);
  say(g, "shifted " + channel + " by " + std::to_string(ms) + " ms -> " + out);
}

void cmd_manip_pitch(const Globals& g, const std::string& in, const std::string& target, const std::string& out) {
  auto f = ac::read_features(in);
  const auto p = parse_pitch(target);
  f.source = ac::control::rescale_pitch(f.source, p.mean, p.std);
  ac::write_features(f, out);
  say(g, "rescaled pitch -> " + out);
}

void cmd_align_fit(const Globals& g, const std::string& src, const std::string& tgt, const std::string& out,
                   double lambda, const std::string& src_id, const std::string& tgt_id) {
  const auto a = ac::read_features(src), b = ac::read_features(tgt);
  const auto m = ac::alignment::fit_affine(a.ema.values, b.ema.values, lambda, src_id, tgt_id);
  ac::alignment::write_affine(out, m);
  say(g, "fit affine map on " + std::to_string(a.frames()) + " frames -> " + out);
}

void cmd_align_apply(const Globals& g, const std::string& map, const std::string& in, const std::string& out) {
  auto f = ac::read_features(in);
  f.ema = ac::alignment::apply_affine(ac::alignment::read_affine(map), f.ema);
  ac::write_features(f, out);
  say(g, "mapped -> " + out);
}

void cmd_align_coef(const std::string& map) {
  const auto c = ac::alignment::coefficient_map(ac::alignment::read_affine(map));
  std::printf("%-4s", "");
  for (const auto& n : ac::kArticulatorNames) std::printf(" %8s", std::string(n).c_str());
  std::printf("\n");
  for (int i = 0; i < 6; ++i) {
    std::printf("%-4s", std::string(ac::kArticulatorNames[i]).c_str());
    for (int j = 0; j < 6; ++j) std::printf(" %8.4f", c(i, j));
    std::printf("\n");
  }
}

void cmd_ingest(const Globals& g, const std::string& dir, const std::string& layout, const std::string& out,
                const std::string& issues_out) {
  const auto r = ac::service::ingest(dir, ac::service::parse_layout(layout));
  ac::service::write_manifest(r.manifest, out);
  if (!issues_out.empty()) {
    std::string text;
    for (const auto& i : r.issues) text += json{{"path", i.path.string()}, {"error", i.error}}.dump() + '\n';
    ac::write_file_atomic(issues_out, text);
  }
  say(g, std::to_string(r.manifest.records.size()) + " record(s), " + std::to_string(r.issues.size()) +
             " rejected -> " + out);
}

void cmd_probe(const Globals& g, const std::string& manifest, const std::string& encoder_id, const std::string& layers,
               int folds, int holdout, double lambda, const std::string& fit_out, const std::string& report_out) {
  const auto m = ac::service::read_manifest(manifest);
  m.validate();
  const auto encoder = ac::analysis::make_encoder(encoder_id, g.encoder_asset);
  const auto ids = parse_layers(layers);
  std::vector<ac::analysis::ProbeUtterance> corpus;
  for (const auto& r : m.records) {
    if (!r.feature_path) throw ac::data_error("probe: '" + r.utterance_id + "' has no feature_path with reference EMA");
    ac::analysis::ProbeUtterance u;
    u.stack = ac::analysis::extract_ssl_features(ac::service::CodecStack::to_internal(ac::read_wav(r.audio_path)),
                                                 *encoder, ids);
    u.ema = ac::analysis::prepare_ema_targets(ac::read_features(*r.feature_path).ema.values);
    corpus.push_back(std::move(u));
  }
  const auto sel = ac::analysis::select_layer_cv(corpus, folds, holdout, lambda);
  json rep = json::array();
  for (const auto& r : sel.reports) {
    rep.push_back({{"layer", r.layer},
                   {"mean_pcc", r.mean_pcc},
                   {"ci95", r.ci95},
                   {"per_channel_pcc", r.per_channel_pcc},
                   {"fold_scores", r.fold_scores}});
    say(g, "layer " + std::to_string(r.layer) + ": mean PCC " + std::to_string(r.mean_pcc) + " +- " +
               std::to_string(r.ci95));
  }
  say(g, "best layer " + std::to_string(sel.best_layer));
  if (!report_out.empty()) {
    ac::write_file_atomic(report_out, json{{"best_layer", sel.best_layer}, {"layers", rep}}.dump(2) + "\n");
  }
  if (!fit_out.empty()) {
    ac::analysis::write_linear_map(fit_out, ac::analysis::fit_layer(corpus, sel.best_layer, lambda));
    say(g, "fit layer " + std::to_string(sel.best_layer) + " map -> " + fit_out);
  }
}

void cmd_train(const Globals& g, const std::string& config, const std::string& data, const std::string& out,
               const std::string& encoder_id, const std::string& aai, bool resume) {
  auto cfg = config.empty() ? ac::vocoder::VocoderConfig{} : ac::vocoder::load_vocoder_config(config);
  const auto encoder = ac::analysis::make_encoder(encoder_id, g.encoder_asset);
  if (cfg.speaker_input_dim != encoder->frontend_dim()) {
    spdlog::info("speaker.input_dim set to {} to match encoder {}", encoder->frontend_dim(), encoder->id());
    cfg.speaker_input_dim = encoder->frontend_dim();
  }
  std::optional<ac::analysis::LinearMap> map;
  if (!aai.empty()) map = ac::analysis::read_linear_map(aai);
  const auto tracker = ac::source::make_pitch_tracker(g.tracker);
  const auto m = ac::service::read_manifest(data);
  m.validate();
  std::vector<ac::vocoder::TrainingExample> examples;
  for (const auto& r : m.records) {
    const auto w = ac::service::CodecStack::to_internal(ac::read_wav(r.audio_path));
    ac::vocoder::TrainingExample ex;
    ex.id = r.utterance_id;
    if (r.feature_path) {
      ex.features = ac::read_features(*r.feature_path);
    } else if (map) {
      // Training features keep f0 on every frame.
      const ac::service::CodecStack view(encoder, *map, tracker,
                                         std::make_shared<const ac::vocoder::VocoderModel>(cfg));
      ex.features = view.encode(w, ac::Mode::kTrain).features;
    } else {
      throw ac::data_error("'" + r.utterance_id + "' has no feature_path; pass --aai to compute features");
    }
    const auto frames = std::min<std::size_t>(ex.features.frames(), w.size() / ac::kHopSamples);
    ex.features.ema.values.conservativeResize(Eigen::NoChange, static_cast<Eigen::Index>(frames));
    ex.features.source.f0.resize(frames);
    ex.features.source.loudness.resize(frames);
    ex.features.source.periodicity.resize(frames);
    ex.wave = ac::Waveform{std::vector<float>(w.samples.begin(), w.samples.begin() + frames * ac::kHopSamples),
                           ac::kInternalRate};
    const auto pooled = ac::speaker::pooled_frontend(w, ex.features.source.periodicity, *encoder);
    ex.pooled.assign(pooled.data(), pooled.data() + pooled.size());
    examples.push_back(std::move(ex));
  }
  spdlog::info("effective config:\n{}", cfg.dump());
  ac::vocoder::VocoderModel model(cfg);
  ac::vocoder::Trainer trainer(model);
  fs::create_directories(out);
  if (resume) {
    const auto latest = fs::path(out) / "latest.ackp";
    if (!fs::exists(latest)) throw ac::missing_asset("nothing to resume: " + latest.string() + " not found");
    trainer.resume(ac::vocoder::load_checkpoint(latest));
    spdlog::info("resumed at step {}", trainer.step());
  }
  const auto last = trainer.train(examples, out);
  if (map) ac::analysis::write_linear_map(fs::path(out) / ac::service::kAaiMapFile, *map);
  say(g, "trained to step " + std::to_string(last.step) + " (mel L1 " + std::to_string(last.mel) + ") -> " + out);
}

void cmd_eval(const Globals& g, const std::string& manifest, const std::vector<std::string>& asr_cmd,
              const std::vector<std::string>& mos_cmd, const std::string& dataset, double timeout_s,
              const std::string& out) {
  const auto stack = load_stack(g);
  const auto m = ac::service::read_manifest(manifest);
  const ac::eval::ScoreCache cache(home_dir(g) / "cache" / "scores");
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000));
  std::optional<ac::eval::SubprocessScorer> asr, mos;
  if (!asr_cmd.empty()) asr.emplace(asr_cmd, timeout);
  if (!mos_cmd.empty()) mos.emplace(mos_cmd, timeout);
  ac::service::EvalOptions opt;
  opt.dataset = dataset.empty() ? fs::path(manifest).stem().string() : dataset;
  opt.asr = asr ? &*asr : nullptr;
  opt.mos = mos ? &*mos : nullptr;
  opt.cache = &cache;
  const auto text = ac::service::to_json(ac::service::evaluate(m, *stack, opt)).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    ac::write_file_atomic(out, text);
    say(g, "report -> " + out);
  }
}

void cmd_export(const Globals& g, const std::string& manifest, const std::string& out) {
  const auto stack = load_stack(g);
  const auto m = ac::service::read_manifest(manifest);
  m.validate();
  std::vector<std::string> ids, labels;
  std::vector<ac::SpeakerEmbedding> emb;
  for (const auto& r : m.records) {
    ids.push_back(r.utterance_id);
    labels.push_back(r.speaker_id);
    emb.push_back(stack->encode(ac::read_wav(r.audio_path)).embedding);
  }
  ac::eval::export_embeddings(ids, labels, emb, out);
  say(g, std::to_string(emb.size()) + " embedding(s) -> " + out);
}

void cmd_serve(const Globals& g, const std::string& config, const std::string& host, int port, double max_duration,
               bool print_config) {
  ac::service::ServiceConfig sc = config.empty() ? ac::service::ServiceConfig{} : ac::service::load_service_config(config);
  if (!g.home.empty()) sc.home = g.home;
  if (!host.empty()) sc.host = host;
  if (port >= 0) sc.port = port;
  if (max_duration > 0) sc.max_duration_s = max_duration;
  if (!g.encoder_asset.empty()) sc.encoder_asset = g.encoder_asset;
  sc.validate();
  if (print_config) {
    std::cout << sc.dump() << "config_hash=" << sc.hash() << '\n';
    return;
  }
  std::shared_ptr<const ac::service::CodecStack> stack;
  try {
    auto paths = g.ckpt.empty() ? sc.stack_paths() : ac::service::stack_paths_in(g.ckpt, sc.encoder_asset, sc.tracker);
    if (g.ckpt.empty() && !fs::exists(paths.checkpoint) && fs::exists(sc.home_dir() / "latest.ackp")) {
      paths.checkpoint = sc.home_dir() / "latest.ackp";
    }
    stack = ac::service::load_codec_stack(paths);
  } catch (const ac::Error& e) {
    if (e.kind() != ac::ErrorKind::kMissingAsset) throw;
    spdlog::warn("{}; serving without a codec stack (model endpoints answer 503)", e.what());
  }
  auto store = std::make_shared<ac::service::TemplateStore>(sc.resolve(sc.templates));
  auto svc = std::make_shared<const ac::service::CodecService>(stack, store, sc.max_duration_s);
  auto srv = ac::service::make_http_server(svc, sc.threads);
  spdlog::info("listening on http://{}:{} (config {})", sc.host, sc.port, sc.hash().substr(0, 12));
  if (!srv->listen(sc.host, sc.port)) throw ac::usage_error("cannot listen on " + sc.host + ":" + std::to_string(sc.port));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"articodec: articulatory speech codec"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--home", g.home, "asset and cache root (default $ARTICODEC_HOME or ~/.articodec)");
  app.add_option("--ckpt", g.ckpt, "directory with vocoder.ackp and aai.aaiw (default: home)");
  app.add_option("--encoder-asset", g.encoder_asset, "weights for an external speech encoder");
  app.add_option("--tracker", g.tracker, "pitch tracker id");
  app.add_flag("-v,--verbose", g.verbose, "debug logging");
  app.add_flag("-q,--quiet", g.quiet, "only warnings and errors");

  std::function<void()> run;

  auto* init = app.add_subcommand("init", "write untrained placeholder assets");
  std::string init_encoder = "mock-ssl", init_preset = "default", init_out;
  std::uint64_t init_seed = 7;
  init->add_option("--encoder", init_encoder, "encoder id")->capture_default_str();
  init->add_option("--preset", init_preset, "vocoder preset (default or tiny)")->capture_default_str();
  init->add_option("-o,--out", init_out, "output directory (default: --ckpt or home)");
  init->add_option("--seed", init_seed)->capture_default_str();
  init->callback([&] { run = [&] { cmd_init(g, init_encoder, init_preset, init_out, init_seed); }; });

  auto* enc = app.add_subcommand("encode", "audio to articulatory features");
  std::string enc_in, enc_out, enc_spk;
  bool enc_train = false;
  enc->add_option("wav", enc_in)->required();
  enc->add_option("-o,--out", enc_out, ".artf output")->required();
  enc->add_option("--spk", enc_spk, "also write the speaker embedding");
  enc->add_flag("--train-mode", enc_train, "keep f0 on unvoiced frames");
  enc->callback([&] { run = [&] { cmd_encode(g, enc_in, enc_out, enc_train, enc_spk); }; });

  auto* syn = app.add_subcommand("synth", "features and speaker embedding to audio");
  std::string syn_f, syn_s, syn_out;
  syn->add_option("features", syn_f)->required();
  syn->add_option("speaker", syn_s)->required();
  syn->add_option("-o,--out", syn_out)->required();
  syn->callback([&] { run = [&] { cmd_synth(g, syn_f, syn_s, syn_out); }; });

  auto* spk = app.add_subcommand("speaker-embed", "speaker template from clips");
  std::vector<std::string> spk_in;
  std::string spk_out, spk_reg;
  int spk_k = 10;
  spk->add_option("wavs", spk_in)->required();
  spk->add_option("-o,--out", spk_out, ".spk output");
  spk->add_option("-k", spk_k, "clips to concatenate")->capture_default_str();
  spk->add_option("--register", spk_reg, "also add to the template store under this id");
  spk->callback([&] { run = [&] { cmd_speaker_embed(g, spk_in, spk_out, spk_k, spk_reg); }; });

  auto* conv = app.add_subcommand("convert", "zero-shot voice conversion");
  std::string conv_in, conv_spk, conv_id, conv_pitch, conv_out;
  bool conv_no_rescale = false;
  conv->add_option("wav", conv_in)->required();
  conv->add_option("--target-spk", conv_spk, "target .spk file");
  conv->add_option("--target-speaker", conv_id, "registered target speaker id");
  conv->add_option("--target-pitch", conv_pitch, "MEAN:STD in Hz");
  conv->add_flag("--no-p-rescale", conv_no_rescale, "keep source pitch");
  conv->add_option("-o,--out", conv_out)->required();
  conv->callback([&] { run = [&] { cmd_convert(g, conv_in, conv_spk, conv_id, conv_pitch, conv_no_rescale, conv_out); }; });

  auto* manip = app.add_subcommand("manip", "edit feature files");
  manip->require_subcommand(1);
  auto* interp = manip->add_subcommand("interp", "alpha * a + (1 - alpha) * b on selected channels");
  std::string ia, ib, ichan = "ema", ialign, iout;
  double ialpha = 0.5;
  interp->add_option("a", ia)->required();
  interp->add_option("b", ib)->required();
  interp->add_option("--alpha", ialpha)->required();
  interp->add_option("--channels", ichan)->capture_default_str();
  interp->add_option("--align", ialign, "frame alignment file (pairs 'i j')");
  interp->add_option("-o,--out", iout)->required();
  interp->callback([&] { run = [&] { cmd_manip_interp(g, ia, ib, ialpha, ichan, ialign, iout); }; });
  auto* shift = manip->add_subcommand("shift", "delay (+) or advance (-) a channel");
  std::string sin, schan, sout;
  double sms = 0;
  shift->add_option("features", sin)->required();
  shift->add_option("--channel", schan)->required();
  shift->add_option("--ms", sms)->required()->allow_extra_args(false);
  shift->add_option("-o,--out", sout)->required();
  shift->callback([&] { run = [&] { cmd_manip_shift(g, sin, schan, sms, sout); }; });
  auto* mpitch = manip->add_subcommand("pitch", "rescale voiced f0 to a target mean and std");
  std::string pin, ptarget, pout;
  mpitch->add_option("features", pin)->required();
  mpitch->add_option("--target-pitch", ptarget, "MEAN:STD in Hz")->required();
  mpitch->add_option("-o,--out", pout)->required();
  mpitch->callback([&] { run = [&] { cmd_manip_pitch(g, pin, ptarget, pout); }; });

  auto* align = app.add_subcommand("align", "cross-speaker affine maps");
  align->require_subcommand(1);
  auto* afit = align->add_subcommand("fit", "fit src -> tgt");
  std::string af_src, af_tgt, af_out, af_sid, af_tid;
  double af_lambda = -1;
  afit->add_option("src", af_src)->required();
  afit->add_option("tgt", af_tgt)->required();
  afit->add_option("-o,--out", af_out)->required();
  afit->add_option("--lambda", af_lambda, "ridge penalty (default 1e-4 * frames)");
  afit->add_option("--src-id", af_sid);
  afit->add_option("--tgt-id", af_tid);
  afit->callback([&] { run = [&] { cmd_align_fit(g, af_src, af_tgt, af_out, af_lambda, af_sid, af_tid); }; });
  auto* aapply = align->add_subcommand("apply", "map a feature file");
  std::string aa_map, aa_in, aa_out;
  aapply->add_option("map", aa_map)->required();
  aapply->add_option("features", aa_in)->required();
  aapply->add_option("-o,--out", aa_out)->required();
  aapply->callback([&] { run = [&] { cmd_align_apply(g, aa_map, aa_in, aa_out); }; });
  auto* acoef = align->add_subcommand("coef", "print the 6x6 articulator coefficient map");
  std::string ac_map;
  acoef->add_option("map", ac_map)->required();
  acoef->callback([&] { run = [&] { cmd_align_coef(ac_map); }; });

  auto* ing = app.add_subcommand("ingest", "scan a corpus into a manifest");
  std::string ing_dir, ing_layout = "flat", ing_out, ing_issues;
  ing->add_option("dir", ing_dir)->required();
  ing->add_option("--layout", ing_layout, "librittsr, vctk or flat")->capture_default_str();
  ing->add_option("-o,--out", ing_out)->required();
  ing->add_option("--issues", ing_issues, "JSONL of rejected files");
  ing->callback([&] { run = [&] { cmd_ingest(g, ing_dir, ing_layout, ing_out, ing_issues); }; });

  auto* probe = app.add_subcommand("probe", "layer-wise linear probing");
  std::string pr_manifest, pr_encoder = "mock-ssl", pr_layers = "0..24", pr_fit, pr_report;
  int pr_folds = 5, pr_holdout = 100;
  double pr_lambda = -1;
  probe->add_option("--manifest", pr_manifest, "records with audio_path and reference EMA in feature_path")->required();
  probe->add_option("--encoder", pr_encoder)->capture_default_str();
  probe->add_option("--layers", pr_layers)->capture_default_str();
  probe->add_option("--folds", pr_folds)->capture_default_str();
  probe->add_option("--holdout", pr_holdout, "utterances per held-out fold")->capture_default_str();
  probe->add_option("--lambda", pr_lambda, "ridge penalty (default 1e-3 * frames)");
  probe->add_option("--fit-out", pr_fit, "write the best layer's .aaiw map");
  probe->add_option("--report", pr_report, "JSON report");
  probe->callback([&] {
    run = [&] { cmd_probe(g, pr_manifest, pr_encoder, pr_layers, pr_folds, pr_holdout, pr_lambda, pr_fit, pr_report); };
  });

  auto* train = app.add_subcommand("train", "train the vocoder");
  std::string tr_config, tr_data, tr_out, tr_encoder = "mock-ssl", tr_aai;
  bool tr_resume = false;
  train->add_option("--config", tr_config, "key=value config");
  train->add_option("--data", tr_data, "manifest")->required();
  train->add_option("--out", tr_out, "checkpoint directory")->required();
  train->add_option("--encoder", tr_encoder)->capture_default_str();
  train->add_option("--aai", tr_aai, ".aaiw map for records without feature_path");
  train->add_flag("--resume", tr_resume, "continue from <out>/latest.ackp");
  train->callback([&] { run = [&] { cmd_train(g, tr_config, tr_data, tr_out, tr_encoder, tr_aai, tr_resume); }; });

  auto* ev = app.add_subcommand("eval", "resynthesis evaluation report");
  std::string ev_manifest, ev_dataset, ev_out;
  std::vector<std::string> ev_asr, ev_mos;
  double ev_timeout = 120;
  ev->add_option("--manifest", ev_manifest)->required();
  ev->add_option("--asr-adapter", ev_asr, "command printing a transcript for a wav path")->expected(1, -1);
  ev->add_option("--mos-adapter", ev_mos, "command printing a quality score for a wav path")->expected(1, -1);
  ev->add_option("--dataset", ev_dataset);
  ev->add_option("--timeout", ev_timeout, "seconds per adapter call")->capture_default_str();
  ev->add_option("-o,--out", ev_out, "report path (default stdout)");
  ev->callback([&] { run = [&] { cmd_eval(g, ev_manifest, ev_asr, ev_mos, ev_dataset, ev_timeout, ev_out); }; });

  auto* exp = app.add_subcommand("export-embeddings", "per-utterance speaker embeddings as TSV/CSV");
  std::string ex_manifest, ex_out;
  exp->add_option("--manifest", ex_manifest)->required();
  exp->add_option("-o,--out", ex_out)->required();
  exp->callback([&] { run = [&] { cmd_export(g, ex_manifest, ex_out); }; });

  auto* serve = app.add_subcommand("serve", "local HTTP service");
  std::string sv_config, sv_host;
  int sv_port = -1;
  double sv_max = 0;
  bool sv_print = false;
  serve->add_option("--config", sv_config, "key=value service config");
  serve->add_option("--host", sv_host);
  serve->add_option("--port", sv_port);
  serve->add_option("--max-duration", sv_max, "seconds");
  serve->add_flag("--print-config", sv_print, "print the effective config and exit");
  serve->callback([&] { run = [&] { cmd_serve(g, sv_config, sv_host, sv_port, sv_max, sv_print); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  spdlog::set_level(g.verbose ? spdlog::level::debug : g.quiet ? spdlog::level::warn : spdlog::level::info);
  try {
    if (run) run();
    return 0;
  } catch (const ac::Error& e) {
    spdlog::error("{}", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return static_cast<int>(ac::ErrorKind::kData);
  }
}
