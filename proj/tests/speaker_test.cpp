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
#include <numeric>
#include <random>

#include "articodec/speaker/encoder.hpp"
#include "test_util.hpp"

namespace articodec::speaker {
namespace {

Waveform noise_clip(std::size_t n, unsigned seed, float sd = 0.1f) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, sd);
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(g(rng));
  return w;
}

Waveform voiced_clip(double f0, std::size_t n, unsigned seed) {
  auto w = noise_clip(n, seed, 0.02f);
  for (std::size_t i = 0; i < n; ++i) {
    for (int k = 1; k <= 6; ++k) {
      w.samples[i] += static_cast<float>(std::sin(2.0 * std::numbers::pi * k * f0 * i / 16000.0) / k);
    }
  }
  return w;
}

analysis::FeatureMatrix random_features(std::mt19937_64& rng, int t, int d) {
  std::normal_distribution<float> g(0.0f, 1.0f);
  analysis::FeatureMatrix f(t, d);
  for (Eigen::Index i = 0; i < f.size(); ++i) f.data()[i] = g(rng);
  return f;
}

const analysis::MockSslEncoder& mock() {
  static const analysis::MockSslEncoder e("mock-ssl", 2, 16, 96);
  return e;
}

SpeakerEncoderParams small_ffn(unsigned seed) {
  nn::Rng rng(seed);
  return SpeakerEncoderParams(96, 96, rng);
}

TEST(FrameFeatures, DeterministicWithFiftyHzFraming) {
  const auto w = noise_clip(16000, 1);
  const auto a = acoustic_frame_features(w, mock());
  const auto b = acoustic_frame_features(w, mock());
  EXPECT_EQ(a, b);
  EXPECT_NEAR(static_cast<double>(a.rows()), 50.0, 1.0);
  EXPECT_EQ(a.cols(), 96);
}

TEST(FrameFeatures, PlantedFrontEndPassesThrough) {
  std::mt19937_64 rng(2);
  const auto plant = random_features(rng, 7, 5);
  const analysis::PlantedSslEncoder enc("planted", {plant}, plant);
  EXPECT_EQ(acoustic_frame_features(noise_clip(100, 3), enc), plant);
}

TEST(WeightedPool, UniformIsMean) {
  std::mt19937_64 rng(4);
  const auto f = random_features(rng, 20, 8);
  const std::vector<float> w(20, 0.7f);
  const Eigen::VectorXf want = f.colwise().mean().transpose();
  EXPECT_LT((weighted_pool(f, w) - want).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WeightedPool, OneHotSelectsFrame) {
  std::mt19937_64 rng(5);
  const auto f = random_features(rng, 10, 8);
  std::vector<float> w(10, 0.0f);
  w[6] = 0.3f;
  EXPECT_EQ(weighted_pool(f, w), Eigen::VectorXf(f.row(6).transpose()));
}

TEST(WeightedPool, MatchesDenseSumOracle) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const auto f = random_features(rng, 37, 12);
  std::vector<float> w(37);
  for (auto& x : w) x = u(rng);
  const auto got = weighted_pool(f, w);
  for (int d = 0; d < 12; ++d) {
    double num = 0, den = 0;
    for (int t = 0; t < 37; ++t) {
      num += static_cast<double>(w[t]) * f(t, d);
      den += w[t];
    }
    EXPECT_NEAR(got[d], num / den, 1e-6);
  }
}

TEST(WeightedPool, PermutationAndScaleInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  const auto f = random_features(rng, 15, 6);
  std::vector<float> w(15);
  for (auto& x : w) x = u(rng);
  std::vector<int> perm(15);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  analysis::FeatureMatrix fp(15, 6);
  std::vector<float> wp(15), w4(15);
  for (int i = 0; i < 15; ++i) {
    fp.row(i) = f.row(perm[i]);
    wp[i] = w[perm[i]];
    w4[i] = 4.0f * w[i];
  }
  const auto base = weighted_pool(f, w);
  EXPECT_LT((weighted_pool(fp, wp) - base).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((weighted_pool(f, w4) - base).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(WeightedPool, AllZeroFallsBackToUniformWithWarning) {
  testing::WarningCapture cap;
  std::mt19937_64 rng(8);
  const auto f = random_features(rng, 9, 4);
  const std::vector<float> w(9, 0.0f);
  const Eigen::VectorXf want = f.colwise().mean().transpose();
  EXPECT_LT((weighted_pool(f, w) - want).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_TRUE(cap.contains("uniform"));
}

TEST(WeightedPool, RejectsBadWeights) {
  std::mt19937_64 rng(9);
  const auto f = random_features(rng, 4, 3);
  EXPECT_THROW(weighted_pool(f, std::vector<float>{1, 1, 1}), Error);
  EXPECT_THROW(weighted_pool(f, std::vector<float>{1, -1, 1, 1}), Error);
}

TEST(EncodeSpeaker, EvalModeIsDeterministic) {
  const auto ffn = small_ffn(1);
  const auto w = voiced_clip(150.0, 16000, 10);
  const std::vector<float> per(50, 0.8f);
  const auto a = encode_speaker(w, per, ffn, mock(), Mode::kInference, 1);
  const auto b = encode_speaker(w, per, ffn, mock(), Mode::kInference, 2);
  EXPECT_EQ(a, b);
  EXPECT_TRUE(a.finite());
  const auto t1 = encode_speaker(w, per, ffn, mock(), Mode::kTrain, 1);
  const auto t2 = encode_speaker(w, per, ffn, mock(), Mode::kTrain, 2);
  EXPECT_NE(t1, t2);
}

TEST(EncodeSpeaker, ZeroWeightsGiveZeroEmbedding) {
  auto ffn = small_ffn(2);
  for (auto* v : {&ffn.layer1.weight, &ffn.layer1.bias, &ffn.layer2.weight, &ffn.layer2.bias}) {
    auto& d = v->mutable_value().data;
    std::fill(d.begin(), d.end(), 0.0f);
  }
  const auto e = encode_speaker(noise_clip(8000, 11), std::vector<float>(25, 1.0f), ffn, mock());
  for (float x : e.vector) EXPECT_EQ(x, 0.0f);
}

TEST(EncodeSpeaker, IdentityFfnGivesGeluOfPooled) {
  auto ffn = small_ffn(3);
  auto& w1 = ffn.layer1.weight.mutable_value().data;
  auto& w2 = ffn.layer2.weight.mutable_value().data;
  std::fill(w1.begin(), w1.end(), 0.0f);
  std::fill(w2.begin(), w2.end(), 0.0f);
  for (int i = 0; i < 96; ++i) w1[i * 96 + i] = 1.0f;
  for (int i = 0; i < 64; ++i) w2[i * 96 + i] = 1.0f;
  for (auto* b : {&ffn.layer1.bias, &ffn.layer2.bias}) {
    auto& d = b->mutable_value().data;
    std::fill(d.begin(), d.end(), 0.0f);
  }
  std::mt19937_64 rng(12);
  const auto plant = random_features(rng, 1, 96);
  const analysis::PlantedSslEncoder enc("planted", {plant}, plant);
  const auto e = encode_speaker(noise_clip(400, 1), std::vector<float>{1.0f}, ffn, enc);
  for (int i = 0; i < 64; ++i) {
    const double v = plant(0, i);
    const double gelu = 0.5 * v * (1.0 + std::erf(v / std::sqrt(2.0)));
    EXPECT_NEAR(e.vector[i], gelu, 1e-6);
  }
}

TEST(EncodeSpeaker, TruncatesToCommonLength) {
  const auto ffn = small_ffn(4);
  const auto w = voiced_clip(120.0, 16000, 13);
  const auto frames = acoustic_frame_features(w, mock()).rows();
  std::vector<float> longer(static_cast<std::size_t>(frames) + 1, 0.5f);
  std::vector<float> exact(static_cast<std::size_t>(frames), 0.5f);
  EXPECT_EQ(encode_speaker(w, longer, ffn, mock()), encode_speaker(w, exact, ffn, mock()));
}

TEST(Template, SingleClipEqualsEncode) {
  const auto ffn = small_ffn(5);
  const source::NccfPitchTracker tracker;
  const auto a = voiced_clip(140.0, 12000, 14);
  const auto src = source::extract_source(a, tracker, Mode::kInference);
  EXPECT_EQ(make_template({a}, ffn, mock(), tracker, 10), encode_speaker(a, src.periodicity, ffn, mock()));
}

TEST(Template, ConcatenatesInsteadOfAveraging) {
  const auto ffn = small_ffn(6);
  const source::NccfPitchTracker tracker;
  const auto a = voiced_clip(110.0, 9600, 15), b = voiced_clip(230.0, 12800, 16);
  Waveform ab = a;
  ab.samples.insert(ab.samples.end(), b.samples.begin(), b.samples.end());
  const auto src = source::extract_source(ab, tracker, Mode::kInference);
  const auto tmpl = make_template({a, b}, ffn, mock(), tracker);
  EXPECT_EQ(tmpl, encode_speaker(ab, src.periodicity, ffn, mock()));

  const auto ea = make_template({a}, ffn, mock(), tracker), eb = make_template({b}, ffn, mock(), tracker);
  double diff = 0;
  for (int i = 0; i < 64; ++i) diff = std::max(diff, std::abs(tmpl.vector[i] - 0.5 * (ea.vector[i] + eb.vector[i])));
  EXPECT_GT(diff, 1e-4);
  EXPECT_NE(make_template({b, a}, ffn, mock(), tracker), tmpl);
}

TEST(Template, UsesOnlyFirstK) {
  const auto ffn = small_ffn(7);
  const source::NccfPitchTracker tracker;
  const auto a = voiced_clip(110.0, 9600, 17), b = voiced_clip(200.0, 9600, 18);
  EXPECT_EQ(make_template({a, b}, ffn, mock(), tracker, 1), make_template({a}, ffn, mock(), tracker, 1));
  EXPECT_THROW(make_template({}, ffn, mock(), tracker), Error);
}

TEST(Freezing, FrontEndUnaffectedByFfnUpdates) {
  auto ffn = small_ffn(8);
  const auto w = noise_clip(16000, 19);
  const auto before = acoustic_frame_features(w, mock());
  for (auto& x : ffn.layer1.weight.mutable_value().data) x += 0.5f;
  EXPECT_EQ(acoustic_frame_features(w, mock()), before);
}

}  // namespace
}  // namespace articodec::speaker
