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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "articodec/source/features.hpp"
#include "test_util.hpp"

namespace articodec::source {
namespace {

Waveform harmonic_tone(double f0, double seconds, int harmonics = 8, int rate = kInternalRate) {
  Waveform w;
  w.sample_rate = rate;
  const auto n = static_cast<std::size_t>(seconds * rate);
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0;
    for (int k = 1; k <= harmonics && k * f0 < rate / 2.0; ++k) {
      v += std::sin(2.0 * std::numbers::pi * k * f0 * i / rate) / k;
    }
    w.samples[i] = static_cast<float>(v);
  }
  return w;
}

Waveform white_noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(g(rng));
  return w;
}

float median_voiced(const std::vector<float>& f0) {
  std::vector<float> v;
  for (float f : f0) {
    if (f > 0) v.push_back(f);
  }
  if (v.empty()) return 0.0f;
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

// Pitch from the first dominant peak of the whole-signal time-domain
// autocorrelation, refined parabolically.
double acf_oracle(const std::vector<float>& x) {
  const int lo = 29, hi = 321;
  std::vector<double> r(hi + 2, 0.0);
  for (int lag = 0; lag <= hi + 1; ++lag) {
    for (std::size_t i = 0; i + lag < x.size(); ++i) r[lag] += static_cast<double>(x[i]) * x[i + lag];
  }
  double best = -1e300;
  for (int lag = lo; lag <= hi; ++lag) best = std::max(best, r[lag]);
  for (int lag = lo; lag <= hi; ++lag) {
    if (r[lag] >= 0.9 * best && r[lag] >= r[lag - 1] && r[lag] >= r[lag + 1]) {
      const double d = 0.5 * (r[lag - 1] - r[lag + 1]) / (r[lag - 1] - 2 * r[lag] + r[lag + 1]);
      return kInternalRate / (lag + d);
    }
  }
  return 0;
}

const NccfPitchTracker& tracker() {
  static const NccfPitchTracker t;
  return t;
}

TEST(Pitch, SilenceIsUnvoicedAtInference) {
  Waveform w;
  w.samples.assign(16000, 0.0f);
  const auto p = track_pitch(w, tracker(), Mode::kInference);
  ASSERT_EQ(p.f0.size(), 50u);
  for (std::size_t t = 0; t < p.f0.size(); ++t) {
    EXPECT_EQ(p.f0[t], 0.0f);
    EXPECT_LE(p.periodicity[t], 0.4f);
  }
}

TEST(Pitch, HarmonicToneMatchesAutocorrelationOracle) {
  const auto w = harmonic_tone(220.0, 1.0);
  const auto p = track_pitch(w, tracker(), Mode::kInference);
  const double oracle = acf_oracle(w.samples);
  EXPECT_NEAR(oracle, 220.0, 1.0);
  EXPECT_NEAR(median_voiced(p.f0), 220.0, 5.0);
  EXPECT_NEAR(median_voiced(p.f0), oracle, 5.0);
  const auto voiced = std::count_if(p.f0.begin(), p.f0.end(), [](float f) { return f > 0; });
  EXPECT_GE(voiced, 45);
}

TEST(Pitch, TracksAcrossTheRange) {
  for (double f : {60.0, 95.0, 140.0, 310.0, 520.0}) {
    const auto p = track_pitch(harmonic_tone(f, 1.0), tracker(), Mode::kInference);
    EXPECT_NEAR(median_voiced(p.f0), f, 0.02 * f) << f;
  }
}

TEST(Pitch, TwoSecondsGivesHundredFrames) {
  const auto p = track_pitch(harmonic_tone(150.0, 2.0), tracker(), Mode::kTrain);
  EXPECT_EQ(p.f0.size(), 100u);
  EXPECT_EQ(p.periodicity.size(), 100u);
  EXPECT_EQ(tracker().track(harmonic_tone(150.0, 2.0)).f0.size(), 400u);
}

TEST(Pitch, ShortClipErrors) {
  Waveform w;
  w.samples.assign(1000, 0.1f);
  try {
    track_pitch(w, tracker(), Mode::kInference);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "clip too short for pitch tracking");
  }
}

TEST(Pitch, RangesAndModeDifference) {
  auto w = white_noise(24000, 1);
  const auto tone = harmonic_tone(180.0, 1.5);
  for (std::size_t i = 8000; i < 24000; ++i) w.samples[i] = 0.05f * w.samples[i] + tone.samples[i - 8000];
  const auto train = track_pitch(w, tracker(), Mode::kTrain);
  const auto infer = track_pitch(w, tracker(), Mode::kInference);
  ASSERT_EQ(train.f0.size(), infer.f0.size());
  int unvoiced = 0;
  for (std::size_t t = 0; t < train.f0.size(); ++t) {
    EXPECT_TRUE(infer.f0[t] == 0.0f || (infer.f0[t] >= 50.0f && infer.f0[t] <= 550.0f));
    EXPECT_GE(train.f0[t], 50.0f);
    EXPECT_LE(train.f0[t], 550.0f);
    EXPECT_GE(train.periodicity[t], 0.0f);
    EXPECT_LE(train.periodicity[t], 1.0f);
    EXPECT_EQ(train.periodicity[t], infer.periodicity[t]);
    if (train.periodicity[t] > 0.4f) {
      EXPECT_EQ(train.f0[t], infer.f0[t]);
    } else {
      EXPECT_EQ(infer.f0[t], 0.0f);
      ++unvoiced;
    }
  }
  // Noise-only first half second is mostly unvoiced; the tone is voiced.
  EXPECT_GE(unvoiced, 15);
  EXPECT_NEAR(median_voiced(std::vector<float>(infer.f0.begin() + 30, infer.f0.end())), 180.0f, 4.0f);
}

TEST(Pitch, DownsampleIsBlockMean) {
  class Fixed : public PitchTracker {
   public:
    std::string id() const override { return "fixed"; }
    std::size_t window() const override { return 1; }
    PitchTrack track(const Waveform& w) const override {
      PitchTrack p;
      for (std::size_t i = 0; i < w.size() / 80; ++i) {
        p.f0.push_back(100.0f + static_cast<float>(i));
        p.periodicity.push_back(i < 8 ? 0.3f : 0.5f);
      }
      return p;
    }
  };
  Waveform w;
  w.samples.assign(1300, 0.0f);  // 16 tracker frames
  const auto p = track_pitch(w, Fixed{}, Mode::kInference);
  ASSERT_EQ(p.f0.size(), 4u);
  EXPECT_EQ(p.f0[0], 0.0f);
  EXPECT_FLOAT_EQ(p.periodicity[0], 0.3f);
  EXPECT_FLOAT_EQ(p.f0[2], 109.5f);
  EXPECT_FLOAT_EQ(p.f0[3], 113.5f);
}

TEST(Pitch, UnknownTrackerIsMissingAsset) {
  try {
    make_pitch_tracker("crepe-full");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingAsset);
  }
}

std::vector<float> loudness_oracle(const std::vector<float>& x) {
  std::vector<float> out;
  for (std::size_t s = 0; s + 320 <= x.size(); s += 320) {
    double acc = 0;
    for (std::size_t i = s; i < s + 320; ++i) acc += std::fabs(static_cast<double>(x[i]));
    out.push_back(static_cast<float>(acc / 320.0));
  }
  return out;
}

TEST(Loudness, MatchesPerBinOracle) {
  for (unsigned seed = 0; seed < 100; ++seed) {
    const auto w = white_noise(16000 + seed * 7, seed);
    const auto got = compute_loudness(w);
    const auto want = loudness_oracle(w.samples);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t t = 0; t < got.size(); ++t) ASSERT_NEAR(got[t], want[t], 1e-6);
  }
}

TEST(Loudness, ZeroAndConstant) {
  Waveform z;
  z.samples.assign(3200, 0.0f);
  for (float v : compute_loudness(z)) EXPECT_EQ(v, 0.0f);
  Waveform c;
  c.samples.assign(3300, -0.75f);
  const auto l = compute_loudness(c);
  EXPECT_EQ(l.size(), 10u);
  for (float v : l) EXPECT_NEAR(v, 0.75f, 1e-7);
}

TEST(Loudness, HomogeneousAndShiftCovariant) {
  const auto w = white_noise(6400, 3);
  auto scaled = w;
  for (auto& s : scaled.samples) s *= -2.5f;
  const auto a = compute_loudness(w), b = compute_loudness(scaled);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_NEAR(b[t], 2.5f * a[t], 1e-6);
  Waveform shifted;
  shifted.samples.assign(3 * 320, 0.0f);
  shifted.samples.insert(shifted.samples.end(), w.samples.begin(), w.samples.end());
  const auto s = compute_loudness(shifted);
  for (std::size_t t = 0; t < a.size(); ++t) EXPECT_EQ(s[t + 3], a[t]);
}

TEST(Loudness, ShortAndWrongRateErrors) {
  Waveform w;
  w.samples.assign(319, 0.1f);
  EXPECT_THROW(compute_loudness(w), Error);
  w.samples.assign(640, 0.1f);
  w.sample_rate = 24000;
  EXPECT_THROW(compute_loudness(w), Error);
}

TEST(SourceFeatures, StreamsShareLengthAndRate) {
  auto w = harmonic_tone(130.0, 1.37, 8, 22050);
  const auto s = extract_source(w, tracker(), Mode::kInference);
  EXPECT_EQ(s.rate, 50);
  EXPECT_EQ(s.f0.size(), s.loudness.size());
  EXPECT_EQ(s.f0.size(), s.periodicity.size());
  EXPECT_NEAR(static_cast<double>(s.f0.size()), 1.37 * 50, 1.0);
  EXPECT_NEAR(median_voiced(s.f0), 130.0f, 3.0f);
}

TEST(SourceFeatures, InputIsZscored) {
  auto w = harmonic_tone(200.0, 0.5);
  auto loud = w;
  for (auto& s : loud.samples) s *= 30.0f;
  const auto a = extract_source(w, tracker(), Mode::kTrain);
  const auto b = extract_source(loud, tracker(), Mode::kTrain);
  for (std::size_t t = 0; t < a.loudness.size(); ++t) EXPECT_NEAR(a.loudness[t], b.loudness[t], 1e-4);
}

}  // namespace
}  // namespace articodec::source
