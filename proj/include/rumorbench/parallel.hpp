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

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "rumorbench/protocol.hpp"

namespace rumorbench {

inline std::size_t default_jobs() {
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. The first exception
// thrown by any task is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::jthread> workers;
  workers.reserve(jobs);
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mu);
          if (!error) error = std::current_exception();
          next.store(n);
        }
      }
    });
  }
  workers.clear();
  if (error) std::rethrow_exception(error);
}

// Predicts a corpus in chunks, concurrently when the adapter allows it.
// Results are assembled in input order regardless of `jobs`.
inline std::vector<PredictOutcome> predict_outcomes_pooled(
    const ModelHandle& model, std::span<const Sample> samples, std::size_t jobs,
    std::size_t chunk = 256) {
  if (!model.concurrent() || jobs <= 1 || samples.size() <= chunk) {
    return model.predict_outcomes(samples);
  }
  const std::size_t n_chunks = (samples.size() + chunk - 1) / chunk;
  std::vector<std::vector<PredictOutcome>> parts(n_chunks);
  parallel_for(n_chunks, jobs, [&](std::size_t c) {
    const std::size_t lo = c * chunk;
    const std::size_t hi = std::min(samples.size(), lo + chunk);
    parts[c] = model.predict_outcomes(samples.subspan(lo, hi - lo));
  });
  std::vector<PredictOutcome> out;
  out.reserve(samples.size());
  for (auto& p : parts) {
    for (auto& o : p) out.push_back(std::move(o));
  }
  return out;
}

inline std::vector<Prediction> predict_pooled(const ModelHandle& model,
                                              std::span<const Sample> samples,
                                              std::size_t jobs) {
  auto outcomes = predict_outcomes_pooled(model, samples, jobs);
  std::vector<Prediction> out;
  out.reserve(outcomes.size());
  for (auto& o : outcomes) {
    if (!o.prediction) {
      throw ProtocolError("adapter failed on id '" + o.sample_id + "': " + o.error);
    }
    out.push_back(std::move(*o.prediction));
  }
  return out;
}

}  // namespace rumorbench
