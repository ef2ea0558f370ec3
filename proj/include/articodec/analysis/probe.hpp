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

#include <Eigen/Core>

#include <string>
#include <vector>

#include "articodec/analysis/encoder.hpp"
#include "articodec/analysis/linear_map.hpp"
#include "articodec/core/error.hpp"
#include "articodec/core/stats.hpp"

namespace articodec::analysis {

struct ProbeReport {
  int layer = -1;
  std::vector<double> per_channel_pcc;
  double mean_pcc = 0;
  double ci95 = 0;
  std::vector<double> fold_scores;
};

namespace detail {

inline std::vector<double> column_pccs(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  std::vector<double> out;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    const Eigen::VectorXd p = pred.col(c), t = truth.col(c);
    out.push_back(pearson(std::span<const double>(p.data(), p.size()), std::span<const double>(t.data(), t.size())));
  }
  return out;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

inline Eigen::MatrixXd stack_rows(const std::vector<Eigen::MatrixXd>& parts) {
  Eigen::Index rows = 0;
  for (const auto& p : parts) rows += p.rows();
  Eigen::MatrixXd out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.middleRows(r, p.rows()) = p;
    r += p.rows();
  }
  return out;
}

}  // namespace detail

// K-fold (contiguous blocks of frames) ridge probe from X to Y. Per-channel
// PCC is over the concatenated held-out predictions; fold scores are the
// per-fold channel-mean PCC.
inline ProbeReport linear_probe(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int folds = 5,
                                double lambda = -1) {
  if (x.rows() != y.rows()) throw usage_error("linear_probe: X and Y frame counts differ");
  if (folds < 2) throw usage_error("linear_probe: need at least 2 folds");
  const Eigen::Index t = x.rows();
  if (t < 2 * folds) throw data_error("linear_probe: need at least " + std::to_string(2 * folds) + " frames");
  Eigen::MatrixXd pred(t, y.cols());
  ProbeReport rep;
  for (int f = 0; f < folds; ++f) {
    const Eigen::Index lo = t * f / folds, hi = t * (f + 1) / folds;
    Eigen::MatrixXd xtr(t - (hi - lo), x.cols()), ytr(t - (hi - lo), y.cols());
    xtr << x.topRows(lo), x.bottomRows(t - hi);
    ytr << y.topRows(lo), y.bottomRows(t - hi);
    const auto s = ridge_fit(xtr, ytr, lambda);
    Eigen::MatrixXd p = x.middleRows(lo, hi - lo) * s.weights;
    p.rowwise() += s.bias.transpose();
    pred.middleRows(lo, hi - lo) = p;
    rep.fold_scores.push_back(detail::mean_of(detail::column_pccs(p, y.middleRows(lo, hi - lo))));
  }
  rep.per_channel_pcc = detail::column_pccs(pred, y);
  rep.mean_pcc = detail::mean_of(rep.per_channel_pcc);
  rep.ci95 = mean_ci95(rep.fold_scores).ci95;
  return rep;
}

// One utterance for layer selection: its SSL stack and 12 x T EMA targets
// (already z-scored and low-passed).
struct ProbeUtterance {
  SslFeatureStack stack;
  Eigen::MatrixXf ema;  // 12 x T
};

struct LayerSelection {
  std::vector<ProbeReport> reports;  // one per layer, in stack order
  int best_layer = -1;
};

// For each fold f the utterances [f*holdout, (f+1)*holdout) are held out and
// the map is fit on all others. Highest mean PCC wins; ties go to the
// lowest layer index.
inline LayerSelection select_layer_cv(const std::vector<ProbeUtterance>& corpus, int folds = 5,
                                      int holdout_utts = 100, double lambda = -1) {
  if (folds < 1 || holdout_utts < 1) throw usage_error("select_layer_cv: folds and holdout must be positive");
  const std::size_t need = static_cast<std::size_t>(folds) * holdout_utts;
  if (corpus.size() < need) {
    throw data_error("select_layer_cv needs at least " + std::to_string(need) + " utterances (folds x holdout), got " +
                     std::to_string(corpus.size()));
  }
  const auto& ids = corpus.front().stack.layer_ids;
  for (const auto& u : corpus) {
    if (u.stack.layer_ids != ids) throw data_error("select_layer_cv: utterances carry different layer sets");
    if (u.ema.rows() != kEmaChannels) throw data_error("select_layer_cv: EMA targets must have 12 channels");
  }

  // Per-utterance aligned design matrices, truncated to the common length.
  auto frames_of = [](const ProbeUtterance& u) { return std::min<Eigen::Index>(u.stack.frames(), u.ema.cols()); };

  LayerSelection sel;
  for (std::size_t li = 0; li < ids.size(); ++li) {
    std::vector<Eigen::MatrixXd> xs, ys;
    for (const auto& u : corpus) {
      const auto n = frames_of(u);
      xs.push_back(u.stack.layers[li].topRows(n).cast<double>());
      ys.push_back(u.ema.leftCols(n).transpose().cast<double>());
    }
    ProbeReport rep;
    rep.layer = ids[li];
    std::vector<double> channel_sum(kEmaChannels, 0.0);
    for (int f = 0; f < folds; ++f) {
      const std::size_t lo = static_cast<std::size_t>(f) * holdout_utts, hi = lo + holdout_utts;
      std::vector<Eigen::MatrixXd> xtr, ytr, xte, yte;
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        auto& dx = (i >= lo && i < hi) ? xte : xtr;
        auto& dy = (i >= lo && i < hi) ? yte : ytr;
        dx.push_back(xs[i]);
        dy.push_back(ys[i]);
      }
      const auto s = ridge_fit(detail::stack_rows(xtr), detail::stack_rows(ytr), lambda);
      Eigen::MatrixXd pred = detail::stack_rows(xte) * s.weights;
      pred.rowwise() += s.bias.transpose();
      const auto pccs = detail::column_pccs(pred, detail::stack_rows(yte));
      for (int c = 0; c < kEmaChannels; ++c) channel_sum[c] += pccs[c];
      rep.fold_scores.push_back(detail::mean_of(pccs));
    }
    for (double s : channel_sum) rep.per_channel_pcc.push_back(s / folds);
    const auto ci = mean_ci95(rep.fold_scores);
    rep.mean_pcc = ci.mean;
    rep.ci95 = ci.ci95;
    sel.reports.push_back(std::move(rep));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.reports.size(); ++i) {
    const auto& a = sel.reports[i];
    const auto& b = sel.reports[best];
    if (a.mean_pcc > b.mean_pcc || (a.mean_pcc == b.mean_pcc && a.layer < b.layer)) best = i;
  }
  sel.best_layer = sel.reports[best].layer;
  return sel;
}

// Final map on every utterance at one layer.
inline LinearMap fit_layer(const std::vector<ProbeUtterance>& corpus, int layer, double lambda = -1) {
  std::vector<Eigen::MatrixXd> xs, ys;
  std::string encoder;
  for (const auto& u : corpus) {
    const auto& l = u.stack.layer(layer);
    const auto n = std::min<Eigen::Index>(l.rows(), u.ema.cols());
    xs.push_back(l.topRows(n).cast<double>());
    ys.push_back(u.ema.leftCols(n).transpose().cast<double>());
    encoder = u.stack.encoder_id;
  }
  return fit_linear_aai(detail::stack_rows(xs), detail::stack_rows(ys), lambda, layer, encoder);
}

}  // namespace articodec::analysis
