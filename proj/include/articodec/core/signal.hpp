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

#include <cmath>
#include <concepts>
#include <span>
#include <string>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"

namespace articodec {

template <std::floating_point T>
struct Moments {
  T mean{};
  T stddev{};  // population
};

// Two-pass mean / population standard deviation.
template <std::floating_point T>
Moments<T> moments(std::span<const T> x) {
  if (x.empty()) return {};
  double sum = 0.0;
  for (T v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (T v : x) ss += (v - mean) * (v - mean);
  return {static_cast<T>(mean),
          static_cast<T>(std::sqrt(ss / static_cast<double>(x.size())))};
}

// Standardizes to zero mean and unit population std. A constant input maps
// to all zeros and logs a constant-channel warning.
template <std::floating_point T>
std::vector<T> zscore(std::span<const T> x) {
  std::vector<T> out(x.size(), T(0));
  if (x.empty()) return out;
  double sum = 0.0;
  for (T v : x) sum += v;
  const double mean = sum / static_cast<double>(x.size());
  double ss = 0.0;
  for (T v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(x.size()));
  if (!(sd > 0.0)) {
    warn("constant-channel: zscore input has zero variance, returning zeros");
    return out;
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = static_cast<T>((x[i] - mean) / sd);
  }
  return out;
}

template <std::floating_point T>
std::vector<T> zscore(const std::vector<T>& x) {
  return zscore(std::span<const T>(x));
}

// Row-wise zscore of a channels x frames matrix.
template <typename Derived>
void zscore_rows_inplace(Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::vector<Scalar> row(m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) row[c] = m(r, c);
    const auto z = zscore(std::span<const Scalar>(row));
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = z[c];
  }
}

namespace detail {

inline int integer_rate_ratio(int from, int to) {
  if (from <= 0 || to <= 0) throw usage_error("rates must be positive");
  const int hi = std::max(from, to), lo = std::min(from, to);
  if (hi % lo != 0) {
    throw usage_error("rate conversion needs an integer ratio, got " +
                      std::to_string(from) + " -> " + std::to_string(to));
  }
  return hi / lo;
}

}  // namespace detail

// Integer-ratio frame-rate conversion on a channels x frames matrix.
// Downsampling averages each k-frame block (a trailing partial block is
// dropped); upsampling repeats every frame k times.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
rate_convert(const Eigen::MatrixBase<Derived>& series, int from, int to) {
  using Scalar = typename Derived::Scalar;
  using Out = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const int k = detail::integer_rate_ratio(from, to);
  if (from == to) return series;
  if (from > to) {
    const Eigen::Index n = series.cols() / k;
    Out out(series.rows(), n);
    for (Eigen::Index t = 0; t < n; ++t) {
      out.col(t) = series.middleCols(t * k, k).rowwise().sum() / Scalar(k);
    }
    return out;
  }
  Out out(series.rows(), series.cols() * k);
  for (Eigen::Index t = 0; t < series.cols(); ++t) {
    for (int j = 0; j < k; ++j) out.col(t * k + j) = series.col(t);
  }
  return out;
}

template <std::floating_point T>
std::vector<T> rate_convert(std::span<const T> series, int from, int to) {
  using Row = Eigen::Matrix<T, 1, Eigen::Dynamic>;
  const Eigen::Map<const Row> m(series.data(),
                                static_cast<Eigen::Index>(series.size()));
  const auto out = rate_convert(m, from, to);
  return std::vector<T>(out.data(), out.data() + out.size());
}

template <std::floating_point T>
std::vector<T> rate_convert(const std::vector<T>& series, int from, int to) {
  return rate_convert(std::span<const T>(series), from, to);
}

}  // namespace articodec
