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

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "articodec/core/error.hpp"
#include "articodec/core/log.hpp"

namespace articodec {

// Pearson correlation. A constant input gives 0 and a warning.
inline double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw usage_error("pearson: length mismatch");
  if (a.size() < 2) throw data_error("pearson: need at least 2 samples");
  const auto n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) {
    warn("pearson: constant series, correlation reported as 0");
    return 0.0;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

inline double pearson(const std::vector<float>& a, const std::vector<float>& b) {
  return pearson(std::vector<double>(a.begin(), a.end()), std::vector<double>(b.begin(), b.end()));
}

struct MeanCi {
  double mean = 0;
  double ci95 = 0;  // half-width, 1.96 * sd / sqrt(n)
};

inline MeanCi mean_ci95(std::span<const double> v) {
  MeanCi r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  const double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  r.ci95 = 1.96 * sd / std::sqrt(static_cast<double>(v.size()));
  return r;
}

}  // namespace articodec
