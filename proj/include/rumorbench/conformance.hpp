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

// Protocol conformance checks for any adapter: handshake, arrival-order
// answers, completeness, attention normalization and statelessness. Runs
// against the raw adapter so ordering is observed before the harness
// re-sorts responses.

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/protocol.hpp"

namespace rumorbench {

struct ConformanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ConformanceReport {
  std::vector<ConformanceCheck> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (!c.passed) return false;
    }
    return !checks.empty();
  }
};

namespace detail {

inline std::string check_batch(const std::vector<PredictOutcome>& raw,
                               std::span<const Sample> samples, bool attention,
                               bool want_order) {
  if (raw.size() != samples.size()) {
    return std::to_string(raw.size()) + " responses for " + std::to_string(samples.size()) +
           " requests";
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto& o = raw[i];
    if (want_order && o.sample_id != samples[i].id) {
      return "response " + std::to_string(i) + " has id '" + o.sample_id + "', expected '" +
             samples[i].id + "'";
    }
    if (!o.prediction) return "error response for '" + o.sample_id + "': " + o.error;
    const auto& p = *o.prediction;
    if (attention) {
      if (!p.attention) return "no attention for '" + o.sample_id + "'";
      if (!attention_is_normalized(*p.attention)) {
        return "attention for '" + o.sample_id + "' sums to " +
               std::to_string(attention_sum(*p.attention));
      }
    } else if (p.attention && !p.attention->empty()) {
      return "attention sent for '" + o.sample_id + "' without the capability";
    }
  }
  return {};
}

}  // namespace detail

// `samples` must hold at least two samples with unique ids.
inline ConformanceReport run_conformance(Adapter& adapter, std::span<const Sample> samples) {
  ConformanceReport r;
  const auto add = [&](std::string name, std::string failure) {
    r.checks.push_back({std::move(name), failure.empty(), std::move(failure)});
  };
  HelloInfo hello;
  try {
    hello = adapter.hello();
    std::string bad;
    if (hello.name.empty()) bad = "empty name";
    for (const auto& c : hello.capabilities) {
      if (c != kAttentionCapability) bad = "unknown capability '" + c + "'";
    }
    add("handshake", bad);
  } catch (const Error& e) {
    add("handshake", e.what());
    return r;
  }
  const bool attention = hello.capabilities.contains(std::string(kAttentionCapability));
  if (samples.size() < 2) throw DataError("conformance needs at least two samples");

  std::vector<PredictOutcome> whole;
  try {
    whole = adapter.predict(samples);
    std::string order;
    for (std::size_t i = 0; order.empty() && i < std::min(whole.size(), samples.size()); ++i) {
      if (whole[i].sample_id != samples[i].id) {
        order = "response " + std::to_string(i) + " has id '" + whole[i].sample_id +
                "', expected '" + samples[i].id + "'";
      }
    }
    add("ordering", order);
    std::string complete = detail::check_batch(whole, samples, attention, false);
    if (complete.empty()) {
      std::vector<bool> seen(samples.size(), false);
      for (const auto& o : whole) {
        std::size_t k = 0;
        while (k < samples.size() && samples[k].id != o.sample_id) ++k;
        if (k == samples.size()) complete = "unknown id '" + o.sample_id + "'";
        else if (seen[k]) complete = "duplicate id '" + o.sample_id + "'";
        else seen[k] = true;
      }
    }
    if (complete.starts_with("attention") || complete.starts_with("no attention")) {
      add("completeness", "");
      add("attention", complete);
    } else {
      add("completeness", complete);
      add("attention", complete.empty() ? "" : "not checked");
    }
  } catch (const Error& e) {
    add("ordering", e.what());
    add("completeness", e.what());
    return r;
  }

  try {
    const std::size_t half = samples.size() / 2;
    auto first = adapter.predict(samples.subspan(0, half));
    auto second = adapter.predict(samples.subspan(half));
    first.insert(first.end(), second.begin(), second.end());
    std::string bad = detail::check_batch(first, samples, attention, true);
    for (std::size_t i = 0; bad.empty() && i < first.size(); ++i) {
      const auto& x = *first[i].prediction;
      const auto& y = *whole[i].prediction;
      if (x.label != y.label || std::abs(x.score - y.score) > 1e-9) {
        bad = "split batches disagree on '" + x.sample_id + "'";
      }
    }
    add("statelessness", bad);
  } catch (const Error& e) {
    add("statelessness", e.what());
  }
  return r;
}

}  // namespace rumorbench
