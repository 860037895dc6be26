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

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rumorbench {

// Base of every error the library raises. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input data (corpus, pair, rule or model files).
class DataError : public Error {
 public:
  using Error::Error;
};

// An adapter violated the prediction protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// The model lacks a capability the requested analysis needs.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

// Binary truth label. False is the rumor class and the positive class for
// every metric in this library.
enum class Label : std::uint8_t { True, False };

inline constexpr std::string_view to_string(Label l) {
  return l == Label::True ? "true" : "false";
}

inline constexpr Label opposite(Label l) {
  return l == Label::True ? Label::False : Label::True;
}

// Scores at or above this value classify as False.
inline constexpr double kDecisionThreshold = 0.5;

inline constexpr Label label_for_score(double score) {
  return score >= kDecisionThreshold ? Label::False : Label::True;
}

// Deterministic random source. std::uniform_*_distribution are
// implementation-defined, so draws are done by hand on top of mt19937_64
// to keep generated corpora and splits identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit =
        std::numeric_limits<std::uint64_t>::max() -
        std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
  }

  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace rumorbench
