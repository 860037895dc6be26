/*
 * Copyright 2026 The rumorbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Independent reference computations used by the unit tests and the
// acceptance binary. Nothing here calls into the library's math.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "rumorbench/common.hpp"

namespace rbtest {

// Logistic loss of the attention model straight from its definition.
inline long double oracle_loss(const std::vector<double>& w, const std::vector<double>& a,
                               double bias, const std::vector<std::size_t>& ids, double y) {
  long double denom = 0;
  for (auto id : ids) denom += std::exp(static_cast<long double>(a[id]));
  long double z = bias;
  for (auto id : ids) z += std::exp(static_cast<long double>(a[id])) / denom * w[id];
  const long double p = 1.0L / (1.0L + std::exp(-z));
  return -(y * std::log(p) + (1.0L - y) * std::log(1.0L - p));
}

// Relative error with a 1e-6 floor on the scale, so exact zeros compare
// against finite-difference noise sensibly.
inline double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
}

struct OracleMetrics {
  double accuracy, precision, recall, f1;
};

// Per-sample recount with False as the positive class.
inline OracleMetrics brute_force_metrics(const std::vector<rumorbench::Label>& gold,
                                         const std::vector<rumorbench::Label>& pred) {
  using rumorbench::Label;
  double correct = 0, pp = 0, gp = 0, both = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    correct += gold[i] == pred[i];
    pp += pred[i] == Label::False;
    gp += gold[i] == Label::False;
    both += pred[i] == Label::False && gold[i] == Label::False;
  }
  const double precision = pp ? both / pp : 0.0;
  const double recall = gp ? both / gp : 0.0;
  const double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0.0;
  return {correct / static_cast<double>(gold.size()), precision, recall, f1};
}

}  // namespace rbtest
