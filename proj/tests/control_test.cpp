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
#include <numbers>
#include <random>

#include "articodec/control/convert.hpp"
#include "articodec/control/manipulate.hpp"
#include "test_util.hpp"

namespace articodec::control {
namespace {

ArticulatoryFeatures random_features(int frames, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> n(0.0f, 1.0f);
  ArticulatoryFeatures f;
  f.ema.values = EmaMatrix(kEmaChannels, frames);
  for (Eigen::Index i = 0; i < f.ema.values.size(); ++i) f.ema.values.data()[i] = n(rng);
  for (int t = 0; t < frames; ++t) {
    f.source.f0.push_back(t % 4 ? 120.0f + 10.0f * n(rng) : 0.0f);
    f.source.periodicity.push_back(0.5f + 0.1f * n(rng));
    f.source.loudness.push_back(std::abs(n(rng)));
  }
  return f;
}

ArticulatoryFeatures constant_features(int frames, float v) {
  ArticulatoryFeatures f;
  f.ema.values = EmaMatrix::Constant(kEmaChannels, frames, v);
  f.source.f0.assign(frames, v);
  f.source.periodicity.assign(frames, 0.9f);
  f.source.loudness.assign(frames, v);
  return f;
}

TEST(Interpolate, EndpointsAreExact) {
  const auto a = random_features(30, 1), b = random_features(30, 2);
  const auto mask = parse_channel_mask("TT,TB,TD");
  EXPECT_EQ(interpolate(a, b, 1.0, mask), a);
  const auto at0 = interpolate(a, b, 0.0, mask);
  for (int c = 0; c < kFeatureChannels; ++c) {
    for (std::size_t t = 0; t < 30; ++t) {
      EXPECT_EQ(at0.channel(c, t), mask.test(c) ? b.channel(c, t) : a.channel(c, t));
    }
  }
}

TEST(Interpolate, ExtrapolatesOutsideUnitRange) {
  const auto a = constant_features(5, 1.0f), b = constant_features(5, 0.0f);
  const auto out = interpolate(a, b, -0.2, parse_channel_mask("all"));
  for (int c = 0; c < kFeatureChannels; ++c) EXPECT_FLOAT_EQ(out.channel(c, 2), -0.2f);
  const auto mid = interpolate(a, b, 0.4, parse_channel_mask("loudness"));
  EXPECT_FLOAT_EQ(mid.source.loudness[0], 0.4f);
  EXPECT_EQ(mid.source.f0[0], 1.0f);
}

TEST(Interpolate, SelfInterpolationIsIdentityAndLengthChecked) {
  const auto a = random_features(20, 3);
  for (double al : {-0.2, 0.3, 1.7}) {
    const auto s = interpolate(a, a, al, parse_channel_mask("all"));
    for (int c = 0; c < kFeatureChannels; ++c) {
      for (std::size_t t = 0; t < a.frames(); ++t) {
        EXPECT_NEAR(s.channel(c, t), a.channel(c, t), 1e-5f * (1.0f + std::abs(a.channel(c, t))));
      }
    }
  }
  try {
    interpolate(a, random_features(21, 4), 0.5, parse_channel_mask("ema"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(std::string(e.what()), "traces must be time-aligned");
  }
}

TEST(FrameAlignment, ParsesAndGathers) {
  const auto al = parse_frame_alignment("# a b\n0 0\n1 0\n2 1\n\n3 3  # tail\n");
  ASSERT_EQ(al.size(), 4u);
  EXPECT_EQ(al[1], (std::pair<std::size_t, std::size_t>{1, 0}));
  const auto a = random_features(5, 21), b = random_features(4, 22);
  const auto [xa, xb] = align_frames(a, b, al);
  ASSERT_EQ(xa.frames(), 4u);
  ASSERT_EQ(xb.frames(), 4u);
  for (int c = 0; c < kFeatureChannels; ++c) {
    EXPECT_EQ(xa.channel(c, 2), a.channel(c, 2));
    EXPECT_EQ(xb.channel(c, 1), b.channel(c, 0));
    EXPECT_EQ(xb.channel(c, 3), b.channel(c, 3));
  }
  EXPECT_EQ(xb.source.periodicity[2], b.source.periodicity[1]);
  EXPECT_NO_THROW(interpolate(xa, xb, 0.4, parse_channel_mask("TT,TB,TD")));
}

TEST(FrameAlignment, Errors) {
  EXPECT_THROW(parse_frame_alignment(""), Error);
  EXPECT_THROW(parse_frame_alignment("1\n"), Error);
  EXPECT_THROW(parse_frame_alignment("1 2 3\n"), Error);
  EXPECT_THROW(parse_frame_alignment("-1 2\n"), Error);
  const auto a = random_features(3, 23);
  EXPECT_THROW(align_frames(a, a, {{0, 0}, {3, 1}}), Error);
}

TEST(ChannelMask, ParsesNames) {
  const auto m = parse_channel_mask("TT,f0,LL_y");
  EXPECT_TRUE(m.test(6) && m.test(7) && m.test(12) && m.test(3));
  EXPECT_EQ(m.count(), 4u);
  EXPECT_EQ(parse_channel_mask("ema").count(), 12u);
  EXPECT_THROW(parse_channel_mask("tongue"), Error);
}

TEST(Shift, ZeroIsIdentity) {
  const auto f = random_features(15, 5);
  EXPECT_EQ(shift_channel(f, "loudness", 0.0), f);
}

TEST(Shift, AdvanceBySixtyMilliseconds) {
  const auto f = random_features(20, 6);
  const auto g = shift_channel(f, "loudness", -60.0);
  for (std::size_t t = 0; t < 17; ++t) EXPECT_EQ(g.source.loudness[t], f.source.loudness[t + 3]);
  for (std::size_t t = 17; t < 20; ++t) EXPECT_EQ(g.source.loudness[t], f.source.loudness[19]);
  for (int c = 0; c < kFeatureChannels; ++c) {
    if (c == kLoudnessChannel) continue;
    for (std::size_t t = 0; t < 20; ++t) EXPECT_EQ(g.channel(c, t), f.channel(c, t));
  }
  EXPECT_EQ(g.source.periodicity, f.source.periodicity);
}

TEST(Shift, RoundTripRestoresInterior) {
  const auto f = random_features(40, 7);
  const auto g = shift_channel(shift_channel(f, "TT_y", 60.0), "TT_y", -60.0);
  for (std::size_t t = 3; t < 37; ++t) EXPECT_EQ(g.channel(7, t), f.channel(7, t));
}

TEST(Shift, RejectsNonFrameMultiples) {
  const auto f = random_features(10, 8);
  try {
    shift_channel(f, "loudness", 30.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUsage);
    EXPECT_NE(std::string(e.what()).find("20 ms"), std::string::npos);
  }
}

TEST(RescalePitch, IdentityWhenStatsMatch) {
  const auto f = random_features(200, 9);
  const auto s = voiced_pitch_stats(f.source.f0);
  const auto r = rescale_pitch(f.source, s.mean, s.std);
  for (std::size_t t = 0; t < r.f0.size(); ++t) EXPECT_NEAR(r.f0[t], f.source.f0[t], 1e-4 * f.source.f0[t] + 1e-6);
  EXPECT_EQ(r.loudness, f.source.loudness);
  EXPECT_EQ(r.periodicity, f.source.periodicity);
}

TEST(RescalePitch, PreClampMomentsMatchTarget) {
  const auto f = random_features(500, 10);
  const auto r = rescaled_f0_unclamped(f.source.f0, 220.0, 20.0);
  double sum = 0, n = 0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (f.source.f0[t] > 0) sum += r[t], ++n;
  }
  const double mean = sum / n;
  double ss = 0;
  for (std::size_t t = 0; t < r.size(); ++t) {
    if (f.source.f0[t] > 0) ss += (r[t] - mean) * (r[t] - mean);
  }
  EXPECT_NEAR(mean, 220.0, 1e-6);
  EXPECT_NEAR(std::sqrt(ss / n), 20.0, 1e-6);
}

TEST(RescalePitch, MatchesClosedFormOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(120.0, 10.0);
  SourceFeatures s;
  for (int t = 0; t < 300; ++t) {
    s.f0.push_back(t % 5 == 0 ? 0.0f : static_cast<float>(g(rng)));
    s.periodicity.push_back(0.7f);
    s.loudness.push_back(0.1f);
  }
  double m = 0, n = 0;
  for (float v : s.f0) {
    if (v > 0) m += v, ++n;
  }
  m /= n;
  double ss = 0;
  for (float v : s.f0) {
    if (v > 0) ss += (v - m) * (v - m);
  }
  const double sd = std::sqrt(ss / n);
  const auto r = rescale_pitch(s, 220.0, 20.0);
  for (std::size_t t = 0; t < s.f0.size(); ++t) {
    if (s.f0[t] == 0) {
      EXPECT_EQ(r.f0[t], 0.0f);
    } else {
      const double want = std::clamp((s.f0[t] - m) / sd * 20.0 + 220.0, 50.0, 550.0);
      EXPECT_NEAR(r.f0[t], want, 1e-4);
    }
  }
}

TEST(RescalePitch, ClampsAndKeepsMask) {
  SourceFeatures s;
  s.f0 = {0, 100, 300, 0, 200};
  s.periodicity.assign(5, 0.8f);
  s.loudness.assign(5, 0.2f);
  const auto r = rescale_pitch(s, 500.0, 300.0);
  for (std::size_t t = 0; t < 5; ++t) {
    EXPECT_EQ(r.f0[t] == 0.0f, s.f0[t] == 0.0f);
    if (r.f0[t] > 0) {
      EXPECT_GE(r.f0[t], 50.0f);
      EXPECT_LE(r.f0[t], 550.0f);
    }
  }
  EXPECT_EQ(r.f0[2], 550.0f);
}

TEST(RescalePitch, DegenerateInputs) {
  SourceFeatures none;
  none.f0.assign(10, 0.0f);
  none.periodicity.assign(10, 0.0f);
  none.loudness.assign(10, 0.0f);
  EXPECT_THROW(rescale_pitch(none, 200, 20), Error);
  SourceFeatures flat = none;
  flat.f0 = {0, 150, 150, 150, 0, 0, 0, 0, 0, 0};
  testing::WarningCapture cap;
  const auto r = rescale_pitch(flat, 210, 15);
  EXPECT_EQ(r.f0[1], 210.0f);
  EXPECT_EQ(r.f0[0], 0.0f);
  EXPECT_TRUE(cap.contains("constant"));
}

Waveform voiced(double f0, double seconds, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.02f);
  Waveform w;
  const auto n = static_cast<std::size_t>(seconds * 16000);
  for (std::size_t i = 0; i < n; ++i) {
    double v = 0;
    for (int k = 1; k <= 5; ++k) v += std::sin(2.0 * std::numbers::pi * k * f0 * i / 16000.0) / k;
    w.samples.push_back(static_cast<float>(0.3 * v * (1.0 + 0.5 * std::sin(6.0 * i / 16000.0))) + g(rng));
  }
  return w;
}

vocoder::VocoderConfig tiny() {
  auto c = vocoder::tiny_vocoder_config();
  c.generator.base_channels = 16;
  c.generator.film_hidden = 16;
  c.speaker_hidden = 64;
  return c;
}

const service::CodecStack& stack() {
  static const auto s = service::make_placeholder_stack("mock-ssl-tiny", tiny());
  return *s;
}

TEST(ConvertVoice, SelfTargetWithoutRescaleIsResynthesis) {
  const auto w = voiced(140.0, 2.2, 1);
  const auto enc = stack().encode(w);
  const auto conv = convert_voice(w, enc.embedding, std::nullopt, stack(), false);
  EXPECT_EQ(conv.features, enc.features);
  EXPECT_EQ(conv.audio.samples, stack().synthesize(enc.features, enc.embedding).samples);
}

TEST(ConvertVoice, TargetsChangeAudioNotArticulation) {
  const auto w = voiced(140.0, 2.2, 2);
  SpeakerEmbedding a, b;
  for (int i = 0; i < kSpeakerDim; ++i) {
    a.vector[i] = std::sin(0.3f * i);
    b.vector[i] = std::cos(0.7f * i);
  }
  const auto ca = convert_voice(w, a, PitchStats{220, 20}, stack(), true);
  const auto cb = convert_voice(w, b, PitchStats{220, 20}, stack(), true);
  EXPECT_EQ(ca.features.ema.values, cb.features.ema.values);
  EXPECT_EQ(ca.features.ema.values, stack().encode(w).features.ema.values);
  EXPECT_NE(ca.audio.samples, cb.audio.samples);
}

TEST(ConvertVoice, IdentityRescaleEqualsNoRescale) {
  const auto w = voiced(150.0, 2.2, 3);
  const auto enc = stack().encode(w);
  const auto s = voiced_pitch_stats(enc.features.source.f0);
  const auto off = convert_voice(w, enc.embedding, std::nullopt, stack(), false);
  const auto on = convert_voice(w, enc.embedding, s, stack(), true);
  for (std::size_t t = 0; t < off.features.source.f0.size(); ++t) {
    EXPECT_NEAR(on.features.source.f0[t], off.features.source.f0[t], 1e-3);
  }
}

TEST(ConvertVoice, ShortClipWarns) {
  testing::WarningCapture cap;
  const auto w = voiced(150.0, 1.0, 4);
  const auto enc = stack().encode(w);
  convert_voice(w, enc.embedding, std::nullopt, stack(), false);
  EXPECT_TRUE(cap.contains("2 s"));
  EXPECT_THROW(convert_voice(w, enc.embedding, std::nullopt, stack(), true), Error);
}

}  // namespace
}  // namespace articodec::control
