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

#include <Eigen/QR>

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include "articodec/analysis/encoder.hpp"
#include "articodec/analysis/linear_map.hpp"
#include "articodec/analysis/probe.hpp"
#include "planted.hpp"
#include "test_util.hpp"

namespace articodec::analysis {
namespace {

using testing::make_layer_corpus;
using testing::make_linear_plant;
using testing::normal_matrix;

double column_pcc(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::VectorXd da = a.array() - a.mean(), db = b.array() - b.mean();
  return da.dot(db) / std::sqrt(da.squaredNorm() * db.squaredNorm());
}

// Ridge with unpenalized intercept as an augmented least-squares problem,
// solved by QR: [X 1; sqrt(l) I 0] [W; b] ~ [Y; 0].
Eigen::MatrixXd ridge_oracle(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double lambda) {
  const auto t = x.rows(), d = x.cols();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t + d, d + 1);
  a.topLeftCorner(t, d) = x;
  a.topRightCorner(t, 1).setOnes();
  a.bottomLeftCorner(d, d) = std::sqrt(lambda) * Eigen::MatrixXd::Identity(d, d);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t + d, y.cols());
  rhs.topRows(t) = y;
  return a.colPivHouseholderQr().solve(rhs);
}

TEST(Ridge, ExactRecoveryWithoutRegularization) {
  std::mt19937_64 rng(1);
  const auto p = make_linear_plant(rng, 400, 20, 12, 0.0);
  const auto s = ridge_fit(p.x, p.y, 0.0);
  EXPECT_LT((s.weights - p.w).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT((s.bias.transpose() - p.b).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Ridge, MatchesAugmentedQrOracle) {
  std::mt19937_64 rng(2);
  const auto p = make_linear_plant(rng, 300, 30, 12, 0.5);
  const double lambda = 7.5;
  const auto s = ridge_fit(p.x, p.y, lambda);
  const auto o = ridge_oracle(p.x, p.y, lambda);
  EXPECT_LT((s.weights - o.topRows(30)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((s.bias.transpose() - o.bottomRows(1)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Ridge, NormalEquationResidual) {
  std::mt19937_64 rng(3);
  const auto p = make_linear_plant(rng, 500, 40, 12, 1.0);
  const auto s = ridge_fit(p.x, p.y);
  const Eigen::MatrixXd xc = p.x.rowwise() - p.x.colwise().mean();
  const Eigen::MatrixXd yc = p.y.rowwise() - p.y.colwise().mean();
  Eigen::MatrixXd g = xc.transpose() * xc;
  g.diagonal().array() += s.lambda;
  const Eigen::MatrixXd rhs = xc.transpose() * yc;
  EXPECT_DOUBLE_EQ(s.lambda, 0.5);
  EXPECT_LT((g * s.weights - rhs).cwiseAbs().maxCoeff() / rhs.cwiseAbs().maxCoeff(), 1e-4);
}

TEST(Ridge, RankDeficientWithoutLambdaErrors) {
  std::mt19937_64 rng(4);
  Eigen::MatrixXd x = normal_matrix(rng, 100, 5);
  x.col(4) = 2.0 * x.col(1);
  const Eigen::MatrixXd y = normal_matrix(rng, 100, 12);
  try {
    ridge_fit(x, y, 0.0);
    FAIL() << "expected rank-deficiency error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kData);
    EXPECT_NE(std::string(e.what()).find("lambda > 0"), std::string::npos);
  }
  EXPECT_NO_THROW(ridge_fit(x, y, 1.0));
}

TEST(Ridge, WarnsWhenUnderdetermined) {
  testing::WarningCapture cap;
  std::mt19937_64 rng(5);
  ridge_fit(normal_matrix(rng, 10, 20), normal_matrix(rng, 10, 12), 1.0);
  EXPECT_TRUE(cap.contains("underdetermined"));
}

TEST(LinearAai, PlantedNoiseHeldOutPcc) {
  std::mt19937_64 rng(6);
  const auto train = make_linear_plant(rng, 6000, 64, 12, 0.01);
  const auto map = fit_linear_aai(train.x.topRows(5000), train.y.topRows(5000));
  const Eigen::MatrixXf held = train.x.bottomRows(1000).cast<float>();
  const Eigen::MatrixXd pred = predict_ema_raw(map, held).transpose().cast<double>();
  for (int c = 0; c < kEmaChannels; ++c) {
    EXPECT_GT(column_pcc(pred.col(c), train.y.bottomRows(1000).col(c)), 0.99) << c;
  }
  EXPECT_LT((map.weights.cast<double>() - train.w).cwiseAbs().maxCoeff(), 0.05);
}

TEST(LinearAai, PermutingFeaturesPermutesWeights) {
  std::mt19937_64 rng(7);
  const auto p = make_linear_plant(rng, 300, 16, 12, 0.3);
  std::vector<int> perm(16);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd xp(p.x.rows(), 16);
  for (int j = 0; j < 16; ++j) xp.col(j) = p.x.col(perm[j]);
  const auto a = fit_linear_aai(p.x, p.y, 1.0);
  const auto b = fit_linear_aai(xp, p.y, 1.0);
  for (int j = 0; j < 16; ++j) {
    EXPECT_LT((b.weights.row(j) - a.weights.row(perm[j])).cwiseAbs().maxCoeff(), 1e-5);
  }
  const Eigen::MatrixXf pa = predict_ema_raw(a, p.x.cast<float>());
  const Eigen::MatrixXf pb = predict_ema_raw(b, xp.cast<float>());
  EXPECT_LT((pa - pb).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(LinearAai, RejectsWrongTargetWidth) {
  std::mt19937_64 rng(8);
  EXPECT_THROW(fit_linear_aai(normal_matrix(rng, 50, 4), normal_matrix(rng, 50, 11)), Error);
}

LinearMap random_map(std::mt19937_64& rng, int d) {
  LinearMap m;
  m.weights = normal_matrix(rng, d, 12).cast<float>();
  m.bias = normal_matrix(rng, 12, 1).cast<float>();
  m.source_layer = 9;
  m.encoder_id = "mock-ssl";
  return m;
}

TEST(PredictEma, ZeroInputZeroBiasGivesZero) {
  LinearMap m;
  m.weights = Eigen::MatrixXf::Ones(8, 12);
  m.bias = Eigen::VectorXf::Zero(12);
  const auto tr = predict_ema(m, Eigen::MatrixXf::Zero(100, 8));
  EXPECT_EQ(tr.values.cols(), 100);
  EXPECT_EQ(tr.rate, 50);
  EXPECT_EQ(tr.values.cwiseAbs().maxCoeff(), 0.0f);
}

TEST(PredictEma, RawEqualsDenseMatmul) {
  std::mt19937_64 rng(9);
  const auto m = random_map(rng, 32);
  const Eigen::MatrixXf x = normal_matrix(rng, 60, 32).cast<float>();
  const Eigen::MatrixXf got = predict_ema_raw(m, x);
  for (int t = 0; t < 60; ++t) {
    for (int c = 0; c < 12; ++c) {
      double acc = m.bias[c];
      for (int d = 0; d < 32; ++d) acc += static_cast<double>(x(t, d)) * m.weights(d, c);
      EXPECT_NEAR(got(c, t), acc, 1e-5 * (1.0 + std::abs(acc)));
    }
  }
}

TEST(PredictEma, RawIsAffine) {
  std::mt19937_64 rng(10);
  const auto m = random_map(rng, 16);
  const Eigen::MatrixXf x1 = normal_matrix(rng, 40, 16).cast<float>();
  const Eigen::MatrixXf x2 = normal_matrix(rng, 40, 16).cast<float>();
  const float a = 0.3f;
  const Eigen::MatrixXf lhs = predict_ema_raw(m, a * x1 + (1 - a) * x2);
  const Eigen::MatrixXf rhs = a * predict_ema_raw(m, x1) + (1 - a) * predict_ema_raw(m, x2);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(PredictEma, IdentityPlantOnSmoothInputIsNearlyUnchanged) {
  LinearMap m;
  m.weights = Eigen::MatrixXf::Identity(12, 12);
  m.bias = Eigen::VectorXf::Zero(12);
  Eigen::MatrixXf x(200, 12);
  for (int t = 0; t < 200; ++t) {
    for (int c = 0; c < 12; ++c) x(t, c) = std::sin(2.0 * std::numbers::pi * (0.5 + 0.1 * c) * t / 50.0);
  }
  const auto tr = predict_ema(m, x);
  Eigen::MatrixXf oracle = x.transpose();
  lowpass_rows_inplace(oracle);
  EXPECT_LT((tr.values - oracle).cwiseAbs().maxCoeff(), 1e-5);
  // Away from the clip edges a sub-2 Hz input passes through the 10 Hz filter.
  EXPECT_LT((tr.values - x.transpose()).middleCols(20, 160).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(PredictEma, DimensionMismatchErrors) {
  std::mt19937_64 rng(11);
  const auto m = random_map(rng, 16);
  EXPECT_THROW(predict_ema(m, Eigen::MatrixXf::Zero(10, 15)), Error);
}

TEST(PrepareTargets, ZscoredThenLowpassed) {
  std::mt19937_64 rng(12);
  EmaMatrix raw(12, 300);
  for (int c = 0; c < 12; ++c) {
    for (int t = 0; t < 300; ++t) raw(c, t) = 5.0f + 3.0f * std::sin(0.05f * t * (c + 1));
  }
  const auto y = prepare_ema_targets(raw);
  EmaMatrix z = raw;
  zscore_rows_inplace(z);
  lowpass_rows_inplace(z);
  EXPECT_LT((y - z).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LT(std::abs(y.row(0).mean()), 0.05);
}

TEST(AaiwFormat, RoundTripIsExact) {
  std::mt19937_64 rng(13);
  const auto m = random_map(rng, 24);
  const auto back = decode_linear_map(encode_linear_map(m));
  EXPECT_EQ(back.weights, m.weights);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.source_layer, 9);
  EXPECT_EQ(back.encoder_id, "mock-ssl");
  const auto path = std::filesystem::temp_directory_path() / "articodec_map_test.aaiw";
  write_linear_map(path, m);
  EXPECT_EQ(read_linear_map(path).weights, m.weights);
  std::filesystem::remove(path);
}

TEST(AaiwFormat, HeaderLayout) {
  std::mt19937_64 rng(14);
  const auto m = random_map(rng, 3);
  const auto bytes = encode_linear_map(m);
  EXPECT_EQ(bytes.substr(0, 4), "AAIW");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1);
  // magic, version, id length + id, layer, D, then (D*12 + 12) floats
  EXPECT_EQ(bytes.size(), 4u + 1 + 4 + 8 + 1 + 4 + (3 * 12 + 12) * 4);
}

TEST(AaiwFormat, ParseErrorsNameTheField) {
  std::mt19937_64 rng(15);
  auto bytes = encode_linear_map(random_map(rng, 4));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  try {
    decode_linear_map(bad_magic);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "magic");
  }
  try {
    decode_linear_map(bytes.substr(0, bytes.size() - 3));
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "payload");
  }
  auto bad_version = bytes;
  bad_version[4] = 7;
  try {
    decode_linear_map(bad_version);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.field(), "version");
  }
}

Waveform noise_wave(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, 0.1f);
  Waveform w;
  for (std::size_t i = 0; i < n; ++i) w.samples.push_back(g(rng));
  return w;
}

TEST(MockEncoder, OneSecondGivesFiftyFramesWithinOne) {
  const MockSslEncoder enc("mock-ssl", 4, 64, 32);
  const auto s = extract_ssl_features(noise_wave(16000, 1), enc, {0, 3});
  EXPECT_EQ(s.frames(), 49);
  EXPECT_EQ(s.dim(), 64);
  EXPECT_EQ(s.layer_ids, (std::vector<int>{0, 3}));
  EXPECT_EQ(enc.frames_for(16000), 49);
  EXPECT_EQ(enc.frontend(noise_wave(16000, 1)).cols(), 32);
}

TEST(MockEncoder, DeterministicAcrossInstances) {
  const auto w = noise_wave(8000, 2);
  const MockSslEncoder a("mock-ssl", 3, 32, 16), b("mock-ssl", 3, 32, 16);
  const auto sa = a.extract(w, {0, 1, 2});
  const auto sb = b.extract(w, {0, 1, 2});
  for (int l = 0; l < 3; ++l) EXPECT_EQ(sa.layers[l], sb.layers[l]);
  EXPECT_NE(sa.layers[0], sa.layers[1]);
  const MockSslEncoder c("mock-other", 3, 32, 16);
  EXPECT_NE(c.extract(w, {0}).layers[0], sa.layers[0]);
}

TEST(MockEncoder, RejectsBadInput) {
  const MockSslEncoder enc("mock-ssl", 2, 8, 8);
  EXPECT_THROW(enc.extract(noise_wave(300, 3), {0}), Error);
  EXPECT_THROW(enc.extract(noise_wave(8000, 3), {2}), Error);
  auto w = noise_wave(8000, 3);
  w.sample_rate = 22050;
  EXPECT_THROW(enc.extract(w, {0}), Error);
}

TEST(PlantedEncoder, StackEqualsPlant) {
  std::mt19937_64 rng(16);
  std::vector<FeatureMatrix> plant = {normal_matrix(rng, 20, 6).cast<float>(),
                                      normal_matrix(rng, 20, 6).cast<float>()};
  const PlantedSslEncoder enc("planted", plant);
  const auto s = extract_ssl_features(noise_wave(100, 4), enc, {1, 0});
  EXPECT_EQ(s.layers[0], plant[1]);
  EXPECT_EQ(s.layers[1], plant[0]);
}

TEST(ExternalEncoder, MissingAssetInstructsDownload) {
  const auto enc = make_encoder("wavlm-large", "/nonexistent/wavlm.bin");
  try {
    enc->extract(noise_wave(16000, 5), {9});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingAsset);
    EXPECT_NE(std::string(e.what()).find("Download"), std::string::npos);
  }
  EXPECT_EQ(make_encoder("mock-ssl")->num_layers(), 25);
}

TEST(LinearProbe, IdentityGivesOne) {
  std::mt19937_64 rng(17);
  const Eigen::MatrixXd x = normal_matrix(rng, 500, 6);
  const auto r = linear_probe(x, x, 5, 0.0);
  ASSERT_EQ(r.per_channel_pcc.size(), 6u);
  for (double p : r.per_channel_pcc) EXPECT_NEAR(p, 1.0, 1e-9);
  EXPECT_EQ(r.fold_scores.size(), 5u);
}

TEST(LinearProbe, SignFlipGivesPositiveFitOfNegatedTarget) {
  std::mt19937_64 rng(18);
  const Eigen::MatrixXd x = normal_matrix(rng, 500, 4);
  // The probe regresses -X on X, so the held-out prediction is -X itself.
  const auto r = linear_probe(x, -x, 5, 0.0);
  for (double p : r.per_channel_pcc) EXPECT_NEAR(p, 1.0, 1e-9);
  // Correlating X against -X directly is the -1 case.
  EXPECT_NEAR(column_pcc(x.col(0), -x.col(0)), -1.0, 1e-12);
}

TEST(LinearProbe, IndependentNoiseNearZero) {
  std::mt19937_64 rng(19);
  const auto r = linear_probe(normal_matrix(rng, 2000, 8), normal_matrix(rng, 2000, 12), 5);
  EXPECT_LT(std::abs(r.mean_pcc), 0.1);
  for (double p : r.per_channel_pcc) {
    EXPECT_GE(p, -1.0);
    EXPECT_LE(p, 1.0);
  }
}

TEST(LinearProbe, ConstantChannelReportsZeroWithWarning) {
  testing::WarningCapture cap;
  std::mt19937_64 rng(20);
  const Eigen::MatrixXd x = normal_matrix(rng, 200, 3);
  Eigen::MatrixXd y = x;
  y.col(1).setConstant(2.0);
  const auto r = linear_probe(x, y, 4);
  EXPECT_EQ(r.per_channel_pcc[1], 0.0);
  EXPECT_TRUE(cap.contains("constant"));
}

TEST(SelectLayer, FindsPlantedLayer) {
  const auto corpus = make_layer_corpus(21, 6, 3, 50, 30, 8);
  const auto sel = select_layer_cv(corpus, 5, 10);
  EXPECT_EQ(sel.best_layer, 3);
  ASSERT_EQ(sel.reports.size(), 6u);
  EXPECT_GT(sel.reports[3].mean_pcc, 0.95);
  EXPECT_LT(std::abs(sel.reports[0].mean_pcc), 0.2);
  EXPECT_EQ(sel.reports[3].fold_scores.size(), 5u);
  EXPECT_GE(sel.reports[3].ci95, 0.0);
}

TEST(SelectLayer, TiesGoToLowestIndex) {
  auto corpus = make_layer_corpus(22, 4, 2, 20, 30, 5);
  for (auto& u : corpus) {
    for (auto& l : u.stack.layers) l = u.stack.layers[2];
  }
  EXPECT_EQ(select_layer_cv(corpus, 4, 5).best_layer, 0);
}

TEST(SelectLayer, TooFewUtterancesNamesTheMinimum) {
  const auto corpus = make_layer_corpus(23, 2, 0, 30, 10, 4);
  try {
    select_layer_cv(corpus, 5, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("50"), std::string::npos);
  }
}

TEST(SelectLayer, FinalFitUsesAllData) {
  const auto corpus = make_layer_corpus(24, 3, 1, 20, 30, 6, 0.0);
  const auto m = fit_layer(corpus, 1, 0.0);
  EXPECT_EQ(m.source_layer, 1);
  EXPECT_EQ(m.encoder_id, "planted");
  const Eigen::MatrixXf pred = predict_ema_raw(m, corpus[5].stack.layers[1]);
  EXPECT_LT((pred - corpus[5].ema).cwiseAbs().maxCoeff(), 1e-3);
}

}  // namespace
}  // namespace articodec::analysis
