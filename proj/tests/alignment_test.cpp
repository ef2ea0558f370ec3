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

#include <filesystem>
#include <random>

#include "articodec/alignment/affine.hpp"

namespace articodec::alignment {
namespace {

EmaMatrix random_trace(std::mt19937_64& rng, int frames) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  EmaMatrix m(kEmaChannels, frames);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

AffineMap random_map(std::mt19937_64& rng) {
  std::normal_distribution<float> n(0.0f, 1.0f);
  AffineMap m;
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) m.weights.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < m.bias.size(); ++i) m.bias.data()[i] = n(rng);
  m.src_speaker = "mngu0";
  m.tgt_speaker = "fsew0";
  return m;
}

TEST(FitAffine, IdentityFit) {
  std::mt19937_64 rng(1);
  const auto x = random_trace(rng, 300);
  const auto m = fit_affine(x, x, 0.0);
  EXPECT_LT((m.weights - Matrix12::Identity()).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(m.bias.cwiseAbs().maxCoeff(), 1e-6);
  const auto back = apply_affine(m, EmaTrace{x, 50});
  EXPECT_LT((back.values - x).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(FitAffine, RecoversPlantedAffine) {
  std::mt19937_64 rng(2);
  const auto plant = random_map(rng);
  const auto x = random_trace(rng, 500);
  const auto y = apply_affine(plant, EmaTrace{x, 50}).values;
  const auto m = fit_affine(x, y, 0.0, "a", "b");
  EXPECT_LT((m.weights - plant.weights).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LT((m.bias - plant.bias).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_EQ(m.src_speaker, "a");
  EXPECT_EQ(m.tgt_speaker, "b");
}

TEST(FitAffine, TooFewFramesWithoutRegularization) {
  std::mt19937_64 rng(3);
  const auto x = random_trace(rng, 12);
  EXPECT_THROW(fit_affine(x, x, 0.0), Error);
  EXPECT_NO_THROW(fit_affine(x, x, 0.5));
  EXPECT_THROW(fit_affine(x, random_trace(rng, 13), 0.0), Error);
}

TEST(ApplyAffine, IdentityAndConstant) {
  std::mt19937_64 rng(4);
  const EmaTrace tr{random_trace(rng, 40), 50};
  EXPECT_EQ(apply_affine(AffineMap{}, tr).values, tr.values);
  AffineMap zero;
  zero.weights.setZero();
  zero.bias.setLinSpaced(1.0f, 12.0f);
  const auto c = apply_affine(zero, tr);
  for (int t = 0; t < 40; ++t) EXPECT_EQ(c.values.col(t), zero.bias);
}

TEST(ApplyAffine, MatchesDenseMatmul) {
  std::mt19937_64 rng(5);
  const auto m = random_map(rng);
  const EmaTrace tr{random_trace(rng, 30), 50};
  const auto got = apply_affine(m, tr);
  for (int t = 0; t < 30; ++t) {
    for (int i = 0; i < 12; ++i) {
      double acc = m.bias[i];
      for (int j = 0; j < 12; ++j) acc += static_cast<double>(m.weights(i, j)) * tr.values(j, t);
      EXPECT_NEAR(got.values(i, t), acc, 1e-5 * (1 + std::abs(acc)));
    }
  }
}

TEST(ApplyAffine, CompositionMatches) {
  std::mt19937_64 rng(6);
  const auto m1 = random_map(rng), m2 = random_map(rng);
  const EmaTrace tr{random_trace(rng, 25), 50};
  const auto two_step = apply_affine(m2, apply_affine(m1, tr));
  const auto composed = apply_affine(compose(m2, m1), tr);
  EXPECT_LT((two_step.values - composed.values).cwiseAbs().maxCoeff() /
                (1 + two_step.values.cwiseAbs().maxCoeff()),
            1e-6);
}

TEST(CoefficientMap, IdentityIsHalfOnDiagonal) {
  const auto c = coefficient_map(AffineMap{});
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) EXPECT_EQ(c(i, j), i == j ? 0.5 : 0.0);
  }
  AffineMap ones;
  ones.weights.setOnes();
  EXPECT_EQ(coefficient_map(ones), CoefficientMap::Ones());
}

TEST(CoefficientMap, MatchesBlockMeanOracle) {
  std::mt19937_64 rng(7);
  const auto m = random_map(rng);
  const auto c = coefficient_map(m);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      double want = 0;
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) want += std::abs(static_cast<double>(m.weights(2 * i + a, 2 * j + b)));
      }
      want /= 4.0;
      EXPECT_NEAR(c(i, j), want, 1e-12);
      EXPECT_GE(c(i, j), 0.0);
    }
  }
}

TEST(AffnFormat, RoundTripAndErrors) {
  std::mt19937_64 rng(8);
  const auto m = random_map(rng);
  const auto bytes = encode_affine(m);
  EXPECT_EQ(bytes.substr(0, 4), "AFFN");
  const auto back = decode_affine(bytes);
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.src_speaker, "mngu0");
  EXPECT_EQ(back.tgt_speaker, "fsew0");
  try {
    decode_affine(bytes.substr(0, bytes.size() - 4));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "payload");
  }
  const auto path = std::filesystem::temp_directory_path() / "articodec_affine_test.affn";
  write_affine(path, m);
  EXPECT_EQ(read_affine(path).weights, m.weights);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace articodec::alignment
