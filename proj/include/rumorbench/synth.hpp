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

// Synthetic corpora with one planted spurious cue at an exact breadth and
// label skew. Filler words are opaque strings ("w0017"). Overall labels are
// balanced 50/50 (False gets the smaller half when n is odd).
//
// With label_signal = 0 non-cue labels are independent of their tokens and
// the cue is the only learnable signal. With label_signal > 0 each filler
// slot of a non-cue sample is drawn, with that probability, from a pool tied
// to the sample's label (two pools of base_vocab_size / 10 words each), which
// gives a model something genuine to learn besides the cue. Cue-bearing
// samples always use neutral filler.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/tokenize.hpp"

namespace rumorbench {

struct SynthConfig {
  std::size_t n = 2000;
  std::string cue_word = "obama";
  double cue_breadth = 0.08;
  double cue_false_share = 0.95;
  std::size_t base_vocab_size = 1000;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 8;
  double label_signal = 0.0;
  std::uint64_t seed = 0;
};

struct SynthCounts {
  std::size_t n_cue = 0;
  std::size_t n_cue_false = 0;
  std::size_t n_false = 0;
};

inline std::size_t round_half_up(double x) {
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

inline std::string filler_word(std::size_t index, std::size_t vocab_size) {
  std::string digits = std::to_string(index);
  const std::size_t width = std::max<std::size_t>(4, std::to_string(vocab_size - 1).size());
  return "w" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

inline bool looks_like_filler(std::string_view w) {
  if (w.size() < 2 || w[0] != 'w') return false;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (w[i] < '0' || w[i] > '9') return false;
  }
  return true;
}

// Validates `cfg` and derives the exact planted counts.
inline SynthCounts synth_counts(const SynthConfig& cfg) {
  if (cfg.n < 2) throw DataError("synth: n must be >= 2");
  if (!(cfg.cue_breadth > 0.0 && cfg.cue_breadth < 1.0)) {
    throw DataError("synth: cue_breadth must lie in (0,1)");
  }
  if (!(cfg.cue_false_share >= 0.0 && cfg.cue_false_share <= 1.0)) {
    throw DataError("synth: cue_false_share must lie in [0,1]");
  }
  if (!(cfg.label_signal >= 0.0 && cfg.label_signal <= 1.0)) {
    throw DataError("synth: label_signal must lie in [0,1]");
  }
  if (cfg.min_tokens < 1 || cfg.max_tokens < cfg.min_tokens) {
    throw DataError("synth: need 1 <= min_tokens <= max_tokens");
  }
  if (cfg.base_vocab_size < 20) throw DataError("synth: base_vocab_size must be >= 20");
  const auto cue = tokenize(cfg.cue_word);
  if (cue.size() != 1 || cue.front() != cfg.cue_word) {
    throw DataError("synth: cue_word '" + cfg.cue_word + "' is not a single canonical token");
  }
  if (looks_like_filler(cfg.cue_word)) {
    throw DataError("synth: cue_word '" + cfg.cue_word + "' collides with filler words");
  }
  SynthCounts c;
  c.n_cue = round_half_up(static_cast<double>(cfg.n) * cfg.cue_breadth);
  if (c.n_cue < 1) throw DataError("synth: round(n * cue_breadth) must be >= 1");
  if (c.n_cue > cfg.n) throw DataError("synth: cue count exceeds n");
  c.n_cue_false = round_half_up(static_cast<double>(c.n_cue) * cfg.cue_false_share);
  c.n_false = cfg.n / 2;
  const std::size_t n_plain = cfg.n - c.n_cue;
  if (c.n_cue_false > c.n_false) {
    throw DataError("synth: infeasible: " + std::to_string(c.n_cue_false) +
                    " False cue samples exceed the " + std::to_string(c.n_false) +
                    " False samples of a balanced corpus");
  }
  const std::size_t plain_false = c.n_false - c.n_cue_false;
  const std::size_t cue_true = c.n_cue - c.n_cue_false;
  const std::size_t n_true = cfg.n - c.n_false;
  if (plain_false > n_plain || cue_true > n_true) {
    throw DataError("synth: infeasible label counts for a balanced corpus");
  }
  return c;
}

inline LabeledCorpus generate(const SynthConfig& cfg) {
  const SynthCounts counts = synth_counts(cfg);
  Rng rng(cfg.seed);

  const std::size_t n = cfg.n;
  // Which rows carry the cue, and their labels.
  std::vector<std::size_t> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = i;
  rng.shuffle(rows);
  std::vector<bool> has_cue(n, false);
  std::vector<Label> labels(n, Label::True);
  for (std::size_t k = 0; k < counts.n_cue; ++k) {
    has_cue[rows[k]] = true;
    if (k < counts.n_cue_false) labels[rows[k]] = Label::False;
  }
  const std::size_t plain_false = counts.n_false - counts.n_cue_false;
  for (std::size_t k = 0; k < plain_false; ++k) {
    labels[rows[counts.n_cue + k]] = Label::False;
  }

  const std::size_t pool = cfg.base_vocab_size / 10;
  const bool pooled = cfg.label_signal > 0.0;
  const std::size_t neutral_lo = pooled ? 2 * pool : 0;
  const auto neutral_word = [&] {
    return filler_word(neutral_lo + rng.below(cfg.base_vocab_size - neutral_lo),
                       cfg.base_vocab_size);
  };

  std::vector<Sample> samples;
  samples.reserve(n);
  const std::size_t id_width = std::max<std::size_t>(5, std::to_string(n).size());
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(
        rng.between(static_cast<std::int64_t>(cfg.min_tokens),
                    static_cast<std::int64_t>(cfg.max_tokens)));
    std::vector<std::string> words;
    words.reserve(k);
    if (has_cue[i]) {
      for (std::size_t t = 0; t + 1 < k; ++t) words.push_back(neutral_word());
      const auto at = rng.below(words.size() + 1);
      words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), cfg.cue_word);
    } else {
      const std::size_t base = labels[i] == Label::True ? 0 : pool;
      for (std::size_t t = 0; t < k; ++t) {
        if (pooled && rng.uniform() < cfg.label_signal) {
          words.push_back(filler_word(base + rng.below(pool), cfg.base_vocab_size));
        } else {
          words.push_back(neutral_word());
        }
      }
    }
    std::string text;
    for (const auto& w : words) {
      if (!text.empty()) text.push_back(' ');
      text += w;
    }
    std::string digits = std::to_string(i + 1);
    Sample s;
    s.id = "s" + std::string(id_width - digits.size(), '0') + digits;
    s.text = std::move(text);
    s.label = labels[i];
    samples.push_back(std::move(s));
  }
  return LabeledCorpus("synth-" + cfg.cue_word, std::move(samples));
}

// Sidecar manifest echoing the configuration and planted counts.
inline nlohmann::ordered_json synth_manifest(const SynthConfig& cfg) {
  const auto c = synth_counts(cfg);
  return {{"config",
           {{"n", cfg.n},
            {"cue_word", cfg.cue_word},
            {"cue_breadth", cfg.cue_breadth},
            {"cue_false_share", cfg.cue_false_share},
            {"base_vocab_size", cfg.base_vocab_size},
            {"min_tokens", cfg.min_tokens},
            {"max_tokens", cfg.max_tokens},
            {"label_signal", cfg.label_signal},
            {"seed", cfg.seed}}},
          {"planted",
           {{"n_cue", c.n_cue}, {"n_cue_false", c.n_cue_false}, {"n_false", c.n_false}}},
          {"tokenizer_version", kTokenizerVersion}};
}

}  // namespace rumorbench
