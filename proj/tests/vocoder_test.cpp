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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

#include "articodec/vocoder/synthesize.hpp"
#include "articodec/vocoder/trainer.hpp"
#include "test_util.hpp"

namespace articodec::vocoder {
namespace {

ArticulatoryFeatures random_features(int frames, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  ArticulatoryFeatures f;
  f.ema.rate = kFeatureRate;
  f.source.rate = kFeatureRate;
  f.ema.values = EmaMatrix(kEmaChannels, frames);
  for (int t = 0; t < frames; ++t) {
    for (int c = 0; c < kEmaChannels; ++c) f.ema.values(c, t) = n(rng);
    f.source.f0.push_back(t % 3 ? 120.0f + 10.0f * n(rng) : 0.0f);
    f.source.periodicity.push_back(0.5f);
    f.source.loudness.push_back(n(rng));
  }
  return f;
}

SpeakerEmbedding random_embedding(unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  SpeakerEmbedding e;
  for (auto& v : e.vector) v = n(rng);
  return e;
}

VocoderConfig tiny_config() {
  VocoderConfig cfg;
  cfg.generator = GeneratorConfig::tiny(32);
  cfg.discriminator = DiscriminatorConfig::tiny();
  cfg.train.batch_size = 1;
  cfg.speaker_input_dim = 16;
  cfg.speaker_hidden = 16;
  return cfg;
}

std::vector<TrainingExample> tiny_dataset() {
  TrainingExample ex;
  ex.id = "utt";
  ex.features = random_features(40, 3);
  ex.wave.sample_rate = kInternalRate;
  std::mt19937_64 rng(4);
  ex.wave.samples = testing::sine(220.0, kInternalRate, 40 * kHopSamples, 0.3);
  ex.pooled.assign(16, 0.25f);
  return {ex};
}

TEST(GeneratorConfig, DefaultsAreConsistent) {
  const GeneratorConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.hop(), 320);
  EXPECT_EQ(cfg.channels(0), 512);
  EXPECT_EQ(cfg.channels(4), 32);
  GeneratorConfig bad = cfg;
  bad.upsample_strides = {5, 4, 2, 1};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(Generator, LengthContract) {
  const Generator<float> gen(GeneratorConfig::tiny(32));
  const auto spk = random_embedding(1);
  for (int t : {1, 16, 100, 257}) {
    const auto wave = synthesize(random_features(t, t), spk, gen);
    EXPECT_EQ(wave.size(), static_cast<std::size_t>(320 * t));
    EXPECT_EQ(wave.sample_rate, 16000);
  }
}

TEST(Generator, DeterministicInEvalMode) {
  const Generator<float> gen(GeneratorConfig::tiny(16));
  const auto f = random_features(8, 2);
  const auto spk = random_embedding(2);
  EXPECT_EQ(synthesize(f, spk, gen).samples, synthesize(f, spk, gen).samples);
}

TEST(Generator, SpeakerEmbeddingChangesOutput) {
  const Generator<float> gen(GeneratorConfig::tiny(16));
  const auto f = random_features(8, 5);
  const auto a = synthesize(f, random_embedding(10), gen);
  const auto b = synthesize(f, random_embedding(11), gen);
  double l2 = 0;
  for (std::size_t i = 0; i < a.size(); ++i) l2 += (a.samples[i] - b.samples[i]) * (a.samples[i] - b.samples[i]);
  EXPECT_GT(l2, 0.0);
}

TEST(Generator, RejectsWrongChannelCount) {
  const Generator<float> gen(GeneratorConfig::tiny(8));
  nn::Rng rng(0);
  const nn::Var<float> x(nn::Tensor<float>({1, 13, 4}));
  const nn::Var<float> s(nn::Tensor<float>({1, 64}));
  EXPECT_THROW(gen(x, s, Mode::kInference, rng), Error);
}

TEST(Film, IdentityZeroScaleAndOracle) {
  nn::Rng rng(1);
  Film<double> film(64, 8, 3, rng);
  auto x = nn::Var<double>(nn::Tensor<double>({1, 3, 5}));
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : x.mutable_value().data) v = n(rng);

  const nn::Var<double> ones(nn::Tensor<double>({1, 3}, 1.0));
  const nn::Var<double> zeros(nn::Tensor<double>({1, 3}, 0.0));
  EXPECT_EQ(nn::channel_affine(x, ones, zeros).data(), x.data());
  const nn::Var<double> center(nn::Tensor<double>({1, 3}, {0.5, -1.0, 2.0}));
  const auto flat = nn::channel_affine(x, zeros, center);
  for (int c = 0; c < 3; ++c) {
    for (int t = 0; t < 5; ++t) EXPECT_EQ(flat.data()[c * 5 + t], center.data()[c]);
  }

  nn::Var<double> spk(nn::Tensor<double>({1, 64}));
  for (auto& v : spk.mutable_value().data) v = n(rng);
  const auto [scale, shift] = film.params(spk, 0.2, false, rng);
  const auto y = film(x, spk, 0.2, false, rng);
  for (int c = 0; c < 3; ++c) {
    for (int t = 0; t < 5; ++t) {
      EXPECT_NEAR(y.data()[c * 5 + t], scale.data()[c] * x.data()[c * 5 + t] + shift.data()[c], 1e-12);
    }
  }
  EXPECT_THROW(film(nn::Var<double>(nn::Tensor<double>({1, 4, 5})), spk, 0.2, false, rng), Error);
}

TEST(Generator, GradientReachesSpeakerEmbedding) {
  const Generator<double> gen([] {
    auto c = GeneratorConfig::tiny(8);
    c.film_hidden = 8;
    return c;
  }());
  nn::Rng rng(0);
  const auto f = random_features(4, 9);
  const nn::Var<double> x(features_to_tensor<double>(f, gen.config()));
  auto spk = nn::Var<double>::parameter(nn::Tensor<double>({1, 64}));
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : spk.mutable_value().data) v = n(rng);
  const LogMel<double> mel;
  const nn::Var<double> target(nn::Tensor<double>({1, 1, 1280}, 0.0));
  auto loss = mel_l1(mel, target, gen(x, spk, Mode::kInference, rng));
  nn::backward(loss);
  double norm = 0;
  for (double g : spk.grad()) norm += g * g;
  EXPECT_GT(norm, 0.0);
}

TEST(Generator, MelL1GradientMatchesFiniteDifferences) {
  auto cfg = GeneratorConfig::tiny(8);
  cfg.film_hidden = 8;
  const Generator<double> gen(cfg);
  nn::Rng rng(0);
  const nn::Var<double> x(features_to_tensor<double>(random_features(4, 21), cfg));
  nn::Var<double> spk(nn::Tensor<double>({1, 64}));
  std::normal_distribution<double> n(0.0, 1.0);
  for (auto& v : spk.mutable_value().data) v = n(rng);
  nn::Tensor<double> tgt({1, 1, 1280});
  for (std::size_t i = 0; i < tgt.size(); ++i) tgt.data[i] = 0.3 * std::sin(0.05 * i);
  const nn::Var<double> target(tgt);
  const LogMel<double> mel;
  auto loss = [&] { return mel_l1(mel, target, gen(x, spk, Mode::kInference, rng)).item(); };

  const auto params = gen.parameters();
  for (const auto& [name, p] : params) nn::Var<double>(p).zero_grad();
  auto l = mel_l1(mel, target, gen(x, spk, Mode::kInference, rng));
  nn::backward(l);

  std::uniform_int_distribution<std::size_t> pick(0, params.size() - 1);
  for (int s = 0; s < 20; ++s) {
    auto p = params[pick(rng)].second;
    std::uniform_int_distribution<std::size_t> idx(0, p.size() - 1);
    const std::size_t i = idx(rng);
    const double analytic = p.grad()[i];
    auto& w = p.mutable_value().data;
    const double orig = w[i], h = 1e-6;
    double up, down;
    {
      nn::NoGradGuard g;
      w[i] = orig + h;
      up = loss();
      w[i] = orig - h;
      down = loss();
      w[i] = orig;
    }
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    EXPECT_LT(std::abs(analytic - numeric) / denom, 1e-2)
        << "sample " << s << " analytic " << analytic << " numeric " << numeric;
  }
}

TEST(Mel, ZeroWaveIsFloor) {
  const auto m = mel_spectrogram(Waveform{std::vector<float>(4000, 0.0f), 16000});
  EXPECT_EQ(m.cols(), MelConfig{}.frames(4000));
  for (Eigen::Index i = 0; i < m.size(); ++i) EXPECT_FLOAT_EQ(m.data()[i], std::log(1e-5f));
}

TEST(Mel, FrameCountFormula) {
  const auto m = mel_spectrogram(Waveform{testing::sine(300.0, 16000, 16000), 16000});
  EXPECT_EQ(m.rows(), 80);
  EXPECT_EQ(m.cols(), 1 + (16000 - 1024) / 160);
}

TEST(Mel, PureToneLandsInItsFilter) {
  const MelConfig cfg;
  const auto fb = mel_filterbank(cfg);
  Eigen::Index expected;
  fb.col(64).maxCoeff(&expected);  // bin 64 is exactly 1 kHz
  const auto m = mel_spectrogram(Waveform{testing::sine(1000.0, 16000, 8000), 16000});
  for (Eigen::Index f = 0; f < m.cols(); ++f) {
    Eigen::Index best;
    m.col(f).maxCoeff(&best);
    EXPECT_EQ(best, expected) << "frame " << f;
  }
}

TEST(Mel, RepeatableAndRejectsShortClips) {
  const Waveform w{testing::sine(440.0, 16000, 3000), 16000};
  EXPECT_EQ(mel_spectrogram(w), mel_spectrogram(w));
  EXPECT_THROW(mel_spectrogram(Waveform{std::vector<float>(1023), 16000}), Error);
  EXPECT_THROW(mel_spectrogram(Waveform{std::vector<float>(4000), 22050}), Error);
}

TEST(Discriminators, EightOutputsAndInternalShapes) {
  const Discriminators<float> disc(DiscriminatorConfig::tiny());
  EXPECT_EQ(disc.size(), 8u);
  const int len = 5121;
  nn::Var<float> x(nn::Tensor<float>({1, 1, len}));
  std::mt19937_64 rng(3);
  std::normal_distribution<float> n(0.0f, 0.3f);
  for (auto& v : x.mutable_value().data) v = n(rng);

  const auto& p2 = disc.periods()[0];
  const auto folded = p2.fold(x);
  EXPECT_EQ(folded.dim(0), 2);
  EXPECT_EQ(folded.dim(2), (len + 1) / 2);
  const auto& s4 = disc.scales()[2];
  EXPECT_EQ(s4.pool(x).dim(2), (len + 3) / 4);

  const auto a = disc(x);
  const auto b = disc(x);
  ASSERT_EQ(a.size(), 8u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].score.data(), b[i].score.data());
}

TEST(Losses, IdentityPairAndWeights) {
  const Discriminators<float> disc(DiscriminatorConfig::tiny());
  const LogMel<float> mel;
  const nn::Var<float> real(nn::Tensor<float>({1, 1, 4096}, testing::sine(330.0, 16000, 4096)));
  nn::Tensor<float> ft({1, 1, 4096}, testing::sine(500.0, 16000, 4096, 0.2));
  const nn::Var<float> fake(ft);

  const auto same = generator_loss(real, real, disc(real), disc(real), mel, LossWeights{});
  EXPECT_EQ(same.mel, 0.0);
  EXPECT_EQ(same.feature_match, 0.0);

  const auto g = generator_loss(real, fake, disc(real), disc(fake), mel, LossWeights{});
  const auto mr = mel_spectrogram(Waveform{real.data(), 16000});
  const auto mf = mel_spectrogram(Waveform{fake.data(), 16000});
  const double oracle = 45.0 * (mr - mf).cwiseAbs().mean();
  EXPECT_NEAR(g.mel, oracle, 1e-4 * oracle);

  LossWeights doubled;
  doubled.mel = 90.0;
  const auto g2 = generator_loss(real, fake, disc(real), disc(fake), mel, doubled);
  EXPECT_NEAR(g2.mel, 2 * g.mel, 1e-9 * g.mel);
  EXPECT_EQ(g2.adversarial, g.adversarial);
  EXPECT_EQ(g2.feature_match, g.feature_match);
  EXPECT_NEAR(g.total.item(), g.adversarial + g.mel + g.feature_match, 1e-4 * g.total.item());
}

TEST(Losses, DiscriminatorLeastSquares) {
  const Discriminators<float> disc(DiscriminatorConfig::tiny());
  const nn::Var<float> a(nn::Tensor<float>({1, 1, 2048}, testing::sine(200.0, 16000, 2048)));
  const auto dr = disc(a);
  const auto l = discriminator_loss(dr, dr);
  double real = 0, fake = 0;
  for (const auto& o : dr) {
    double r = 0, f = 0;
    for (float v : o.score.data()) {
      r += (1.0 - v) * (1.0 - v);
      f += static_cast<double>(v) * v;
    }
    real += r / o.score.size();
    fake += f / o.score.size();
  }
  EXPECT_NEAR(l.real, real, 1e-4);
  EXPECT_NEAR(l.fake, fake, 1e-4);
}

TEST(Losses, NonFiniteAborts) {
  const Discriminators<float> disc(DiscriminatorConfig::tiny());
  const LogMel<float> mel;
  const nn::Var<float> real(nn::Tensor<float>({1, 1, 2048}, testing::sine(200.0, 16000, 2048)));
  nn::Tensor<float> bad({1, 1, 2048}, 0.1f);
  bad.data[100] = std::numeric_limits<float>::quiet_NaN();
  const nn::Var<float> fake(bad);
  EXPECT_THROW(generator_loss(real, fake, disc(real), disc(fake), mel, LossWeights{}), Error);
}

TEST(TrainConfig, LearningRateSchedule) {
  const TrainConfig tc;
  EXPECT_DOUBLE_EQ(tc.lr_at(0), 1e-4);
  EXPECT_DOUBLE_EQ(tc.lr_at(7999), 1e-4);
  EXPECT_DOUBLE_EQ(tc.lr_at(8000), 5e-5);
  EXPECT_DOUBLE_EQ(tc.lr_at(16000), 1e-4 / 4);
  EXPECT_DOUBLE_EQ(tc.lr_at(400000), tc.lr_at(320000));
  EXPECT_EQ(tc.window_frames(), 16);
  EXPECT_EQ(tc.window_samples(), 5120);
}

TEST(Trainer, UpdatesTouchOnlyTheirOwnParameters) {
  VocoderModel model(tiny_config());
  Trainer tr(model);
  const auto data = tiny_dataset();
  auto snapshot = [](const nn::NamedParams<float>& p) {
    std::vector<std::vector<float>> out;
    for (const auto& [n, v] : p) out.push_back(v.data());
    return out;
  };
  const auto g0 = snapshot(model.generator_params());
  const auto d0 = snapshot(model.discriminator_params());
  const auto stats = tr.train_step(tr.sample_batch(data));
  EXPECT_TRUE(std::isfinite(stats.generator_total));
  EXPECT_NE(snapshot(model.generator_params()), g0);
  EXPECT_NE(snapshot(model.discriminator_params()), d0);

  // Disjoint parameter sets.
  for (const auto& [gn, gv] : model.generator_params()) {
    for (const auto& [dn, dv] : model.discriminator_params()) ASSERT_NE(gv.node(), dv.node());
  }
}

TEST(Trainer, CheckpointRoundTripAndResume) {
  const auto dir = std::filesystem::temp_directory_path() / "articodec_ckpt_test";
  std::filesystem::remove_all(dir);
  auto cfg = tiny_config();
  cfg.train.total_steps = 3;
  cfg.train.checkpoint_every = 2;
  cfg.train.log_every = 0;
  const auto data = tiny_dataset();

  VocoderModel a(cfg);
  Trainer ta(a);
  ta.train(data, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "step-00000002.ackp"));
  EXPECT_TRUE(std::filesystem::exists(dir / "step-00000003.ackp"));
  const auto ck = load_checkpoint(dir / "latest.ackp");
  EXPECT_EQ(ck.step, 3u);
  EXPECT_EQ(ck.config_hash, a.config_hash());
  EXPECT_EQ(decode_checkpoint(encode_checkpoint(ck)).tensors.size(), ck.tensors.size());

  // Resume from step 2 and run on to the target step.
  VocoderModel b(cfg);
  Trainer tb(b);
  tb.resume(load_checkpoint(dir / "step-00000002.ackp"));
  EXPECT_EQ(tb.step(), 2);
  tb.train(data, dir / "resumed");
  EXPECT_EQ(tb.step(), 3);

  const auto f = random_features(5, 1);
  const auto spk = random_embedding(1);
  VocoderModel c(cfg);
  load_weights(c, load_checkpoint(dir / "latest.ackp"));
  EXPECT_EQ(synthesize(f, spk, c.generator).samples, synthesize(f, spk, a.generator).samples);

  auto other = cfg;
  other.generator.film_hidden = 16;
  VocoderModel d(other);
  Trainer td(d);
  EXPECT_THROW(td.resume(ck), Error);
  std::filesystem::remove_all(dir);
}

TEST(Trainer, RejectsEmptyOrShortData) {
  VocoderModel model(tiny_config());
  Trainer tr(model);
  EXPECT_THROW(tr.sample_batch({}), Error);
  auto data = tiny_dataset();
  data[0].features.truncate(10);
  EXPECT_THROW(tr.sample_batch(data), Error);
}

TEST(Checkpoint, ParseErrorsNameTheField) {
  try {
    decode_checkpoint("XXXX");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "magic");
  }
  Checkpoint c;
  c.tensors.push_back({"w", {2, 2}, {1, 2, 3, 4}});
  auto bytes = encode_checkpoint(c);
  bytes.resize(bytes.size() - 3);
  EXPECT_THROW(decode_checkpoint(bytes), ParseError);
}

}  // namespace
}  // namespace articodec::vocoder
