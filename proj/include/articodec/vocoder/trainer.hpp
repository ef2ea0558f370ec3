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

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "articodec/core/digest.hpp"
#include "articodec/core/log.hpp"
#include "articodec/core/types.hpp"
#include "articodec/nn/adam.hpp"
#include "articodec/speaker/ffn.hpp"
#include "articodec/vocoder/checkpoint.hpp"
#include "articodec/vocoder/config.hpp"
#include "articodec/vocoder/config_io.hpp"
#include "articodec/vocoder/discriminator.hpp"
#include "articodec/vocoder/generator.hpp"
#include "articodec/vocoder/loss.hpp"

namespace articodec::vocoder {

// Generator, discriminators and speaker FFN built from one config.
struct VocoderModel {
  VocoderConfig config;
  Generator<float> generator;
  Discriminators<float> discriminators;
  speaker::SpeakerFfn<float> speaker_ffn;

  explicit VocoderModel(VocoderConfig cfg)
      : config(std::move(cfg)), generator(config.generator), discriminators(config.discriminator) {
    config.validate();
    nn::Rng rng(config.generator.seed ^ 0x5eedULL);
    speaker_ffn = speaker::SpeakerFfn<float>(config.speaker_input_dim, config.speaker_hidden, rng);
  }

  std::string config_hash() const { return sha256_hex(config.dump()); }

  nn::NamedParams<float> generator_params() const {
    auto p = generator.parameters("gen");
    speaker_ffn.collect("spk", p);
    return p;
  }
  nn::NamedParams<float> discriminator_params() const { return discriminators.parameters("disc"); }
};

// One utterance: audio, its features and the pooled speaker front-end
// vector (computed once from the full utterance).
struct TrainingExample {
  std::string id;
  Waveform wave;
  ArticulatoryFeatures features;
  std::vector<float> pooled;
};

struct StepStats {
  long long step = 0;
  double lr = 0;
  double generator_total = 0;
  double adversarial = 0;
  double mel = 0;
  double feature_match = 0;
  double discriminator = 0;
};

// A fixed batch of training windows.
struct Batch {
  nn::Tensor<float> features;  // [B, 14, frames]
  nn::Tensor<float> audio;     // [B, 1, frames * 320]
  nn::Tensor<float> pooled;    // [B, D]
};

class Trainer {
 public:
  explicit Trainer(VocoderModel& model)
      : model_(model),
        mel_(model.config.mel),
        opt_g_(model.generator_params(), adam_options(model.config.train)),
        opt_d_(model.discriminator_params(), adam_options(model.config.train)),
        rng_(model.config.train.seed) {}

  long long step() const { return step_; }
  const LogMel<float>& mel() const { return mel_; }

  // Random window per example; examples drawn in shuffled epochs.
  Batch sample_batch(const std::vector<TrainingExample>& data) {
    const auto& tc = model_.config.train;
    const int frames = tc.window_frames();
    if (data.empty()) throw data_error("training dataset is empty");
    std::vector<const TrainingExample*> picks;
    while (static_cast<int>(picks.size()) < tc.batch_size) {
      if (cursor_ >= order_.size()) {
        order_.clear();
        for (std::size_t i = 0; i < data.size(); ++i) {
          if (static_cast<int>(data[i].features.frames()) >= frames) order_.push_back(i);
        }
        if (order_.empty()) {
          throw data_error("no clip covers the " + std::to_string(tc.window_ms) + " ms training window");
        }
        std::shuffle(order_.begin(), order_.end(), rng_);
        cursor_ = 0;
      }
      picks.push_back(&data[order_[cursor_++]]);
    }
    std::vector<int> starts;
    for (const auto* ex : picks) {
      std::uniform_int_distribution<int> u(0, static_cast<int>(ex->features.frames()) - frames);
      starts.push_back(u(rng_));
    }
    return make_batch(picks, starts);
  }

  Batch make_batch(const std::vector<const TrainingExample*>& picks, const std::vector<int>& starts) const {
    const auto& tc = model_.config.train;
    const int frames = tc.window_frames(), samples = tc.window_samples();
    const int b = static_cast<int>(picks.size());
    const int d = model_.speaker_ffn.input_dim();
    Batch out{nn::Tensor<float>({b, kFeatureChannels, frames}), nn::Tensor<float>({b, 1, samples}),
              nn::Tensor<float>({b, d})};
    for (int i = 0; i < b; ++i) {
      const auto& ex = *picks[i];
      if (static_cast<int>(ex.pooled.size()) != d) {
        throw data_error("example " + ex.id + ": pooled speaker vector has " +
                         std::to_string(ex.pooled.size()) + " dims, expected " + std::to_string(d));
      }
      const auto f = features_to_tensor<float>(ex.features, model_.config.generator, starts[i], frames);
      std::copy(f.data.begin(), f.data.end(),
                out.features.data.begin() + static_cast<std::ptrdiff_t>(i) * kFeatureChannels * frames);
      const std::size_t s0 = static_cast<std::size_t>(starts[i]) * kHopSamples;
      for (int t = 0; t < samples; ++t) {
        const std::size_t src = s0 + t;
        out.audio.data[static_cast<std::size_t>(i) * samples + t] =
            src < ex.wave.samples.size() ? ex.wave.samples[src] : 0.0f;
      }
      std::copy(ex.pooled.begin(), ex.pooled.end(), out.pooled.data.begin() + static_cast<std::ptrdiff_t>(i) * d);
    }
    return out;
  }

  // One discriminator update followed by one generator update.
  StepStats train_step(const Batch& batch) {
    const double lr = model_.config.train.lr_at(step_);
    opt_g_.set_lr(lr);
    opt_d_.set_lr(lr);
    const nn::Var<float> real(batch.audio);
    const nn::Var<float> feats(batch.features);
    const nn::Var<float> pooled(batch.pooled);

    const auto spk = model_.speaker_ffn(pooled, Mode::kTrain, rng_);
    const auto fake = model_.generator(feats, spk, Mode::kTrain, rng_);

    const auto d_params = opt_d_.params();
    nn::set_requires_grad(d_params, true);
    const auto d_loss = discriminator_loss(model_.discriminators(real),
                                           model_.discriminators(fake.detach()));
    opt_d_.zero_grad();
    nn::backward(d_loss.total);
    opt_d_.step();

    nn::set_requires_grad(d_params, false);
    GeneratorLoss<float> g_loss;
    try {
      const auto d_real = model_.discriminators(real);
      const auto d_fake = model_.discriminators(fake);
      g_loss = generator_loss(real, fake, d_real, d_fake, mel_, model_.config.loss);
    } catch (...) {
      nn::set_requires_grad(d_params, true);
      throw;
    }
    opt_g_.zero_grad();
    nn::backward(g_loss.total);
    opt_g_.step();
    nn::set_requires_grad(d_params, true);

    ++step_;
    return {step_, lr, g_loss.total.item(), g_loss.adversarial, g_loss.mel, g_loss.feature_match,
            d_loss.total.item()};
  }

  // Unweighted mel L1 of the eval-mode generator on a fixed batch.
  double eval_mel_l1(const Batch& batch) const {
    nn::NoGradGuard guard;
    nn::Rng rng(0);
    const auto spk = model_.speaker_ffn(nn::Var<float>(batch.pooled), Mode::kInference, rng);
    const auto fake = model_.generator(nn::Var<float>(batch.features), spk, Mode::kInference, rng);
    return mel_l1(mel_, nn::Var<float>(batch.audio), fake).item();
  }

  Checkpoint checkpoint() const {
    Checkpoint c;
    c.step = static_cast<std::uint64_t>(step_);
    c.lr = model_.config.train.lr_at(step_);
    c.config_hash = model_.config_hash();
    c.config_dump = model_.config.dump();
    c.add(model_.generator_params());
    c.add(model_.discriminator_params());
    c.add(prefixed("opt_g/", opt_g_.state()));
    c.add(prefixed("opt_d/", opt_d_.state()));
    return c;
  }

  void resume(const Checkpoint& c) {
    if (c.config_hash != model_.config_hash()) {
      throw usage_error("config hash mismatch on resume: checkpoint " + c.config_hash + ", current " +
                        model_.config_hash());
    }
    c.restore(model_.generator_params());
    c.restore(model_.discriminator_params());
    restore_optimizer(c, "opt_g/", opt_g_, static_cast<long long>(c.step));
    restore_optimizer(c, "opt_d/", opt_d_, static_cast<long long>(c.step));
    step_ = static_cast<long long>(c.step);
  }

  // Runs until total_steps, saving every checkpoint_every steps and at the
  // end. Returns the final step's stats.
  StepStats train(const std::vector<TrainingExample>& data, const std::filesystem::path& out_dir,
                  const std::function<void(const StepStats&)>& on_step = {}) {
    const auto& tc = model_.config.train;
    if (data.empty()) throw data_error("training dataset is empty");
    StepStats last{step_, tc.lr_at(step_)};
    while (step_ < tc.total_steps) {
      last = train_step(sample_batch(data));
      if (on_step) on_step(last);
      if (tc.log_every > 0 && step_ % tc.log_every == 0) {
        spdlog::info("step {} lr {:.3g} g {:.4f} (adv {:.4f} mel {:.4f} fm {:.4f}) d {:.4f}", last.step,
                     last.lr, last.generator_total, last.adversarial, last.mel, last.feature_match,
                     last.discriminator);
      }
      if (step_ % tc.checkpoint_every == 0 || step_ == tc.total_steps) save(out_dir);
    }
    return last;
  }

  void save(const std::filesystem::path& out_dir) const {
    const auto c = checkpoint();
    char name[32];
    std::snprintf(name, sizeof name, "step-%08lld.ackp", step_);
    save_checkpoint(out_dir / name, c);
    save_checkpoint(out_dir / "latest.ackp", c);
  }

 private:
  static nn::AdamOptions adam_options(const TrainConfig& t) { return {t.lr, t.beta1, t.beta2, 1e-8}; }

  static nn::NamedParams<float> prefixed(const std::string& p, nn::NamedParams<float> params) {
    for (auto& [name, v] : params) name = p + name;
    return params;
  }

  static void restore_optimizer(const Checkpoint& c, const std::string& prefix, nn::Adam<float>& opt,
                                long long t) {
    std::vector<std::vector<float>> m, v;
    for (const auto& [name, p] : opt.params()) {
      const auto* mt = c.find(prefix + name + ".adam_m");
      const auto* vt = c.find(prefix + name + ".adam_v");
      if (!mt || !vt) throw data_error("checkpoint is missing optimizer state for " + name);
      m.push_back(mt->data);
      v.push_back(vt->data);
    }
    opt.load_state(m, v, t);
  }

  VocoderModel& model_;
  LogMel<float> mel_;
  nn::Adam<float> opt_g_;
  nn::Adam<float> opt_d_;
  nn::Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  long long step_ = 0;
};

// Restores generator, discriminator and speaker FFN weights from a
// checkpoint into a model built from the config dump stored with it.
inline void load_weights(VocoderModel& model, const Checkpoint& c) {
  if (c.config_hash != model.config_hash()) {
    throw usage_error("checkpoint was trained with a different config (hash " + c.config_hash + ")");
  }
  c.restore(model.generator_params());
  c.restore(model.discriminator_params());
}

// Rebuilds the model a checkpoint was trained with and loads its weights.
inline VocoderModel model_from_checkpoint(const Checkpoint& c) {
  VocoderModel model(parse_vocoder_config(c.config_dump));
  load_weights(model, c);
  return model;
}

}  // namespace articodec::vocoder
