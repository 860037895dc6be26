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

// Spurious-cue detection. For every word: breadth b (share of samples that
// contain it), strength s (mean attention mass the model gives it inside
// those samples) and false_share (label skew among them). Words with
// s >= s_min and b >= b_min are flagged.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/parallel.hpp"
#include "rumorbench/protocol.hpp"
#include "rumorbench/tokenize.hpp"

namespace rumorbench {

struct CueStats {
  std::string word;
  double strength_s = 0.0;
  double breadth_b = 0.0;
  std::size_t n_containing = 0;
  double false_share = 0.0;
};

struct CueScanConfig {
  double s_min = 0.8;
  double b_min = 0.05;
  std::size_t min_token_length = 2;  // in code points; 0 disables the filter
};

inline void validate(const CueScanConfig& cfg) {
  if (!(cfg.s_min > 0.0 && cfg.s_min <= 1.0)) throw DataError("s_min must lie in (0,1]");
  if (!(cfg.b_min > 0.0 && cfg.b_min <= 1.0)) throw DataError("b_min must lie in (0,1]");
}

// Token sets per sample under the shared tokenizer.
class CueIndex {
 public:
  explicit CueIndex(const LabeledCorpus& corpus) : corpus_(&corpus) {
    if (corpus.empty()) throw DataError("cue scan over an empty corpus");
    token_sets_.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      auto toks = tokenize(corpus[i].text);
      std::set<std::string> uniq(toks.begin(), toks.end());
      for (const auto& t : uniq) containing_[t].push_back(i);
      token_sets_.push_back(std::move(uniq));
    }
  }

  const LabeledCorpus& corpus() const { return *corpus_; }

  const std::vector<std::size_t>& containing(std::string_view word) const {
    static const std::vector<std::size_t> kNone;
    auto it = containing_.find(std::string(word));
    return it == containing_.end() ? kNone : it->second;
  }

  double breadth(std::string_view word) const {
    return static_cast<double>(containing(word).size()) /
           static_cast<double>(corpus_->size());
  }

  double label_skew(std::string_view word) const {
    const auto& rows = containing(word);
    if (rows.empty()) throw DataError("word '" + std::string(word) + "' is absent from corpus");
    std::size_t n_false = 0;
    for (auto i : rows) n_false += (*corpus_)[i].label == Label::False;
    return static_cast<double>(n_false) / static_cast<double>(rows.size());
  }

  // Vocabulary in lexicographic order.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    out.reserve(containing_.size());
    for (const auto& [w, _] : containing_) out.push_back(w);
    return out;
  }

 private:
  const LabeledCorpus* corpus_;
  std::vector<std::set<std::string>> token_sets_;
  std::map<std::string, std::vector<std::size_t>> containing_;
};

// Attention vectors for a whole corpus, fetched once.
class AttentionCache {
 public:
  AttentionCache(const ModelHandle& model, const LabeledCorpus& corpus, std::size_t jobs = 1) {
    if (!model.has_attention()) {
      throw CapabilityError("model '" + model.name() +
                            "' does not declare the attention capability");
    }
    auto preds = predict_pooled(model, corpus.samples(), jobs);
    masses_.resize(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
      if (!preds[i].attention) {
        throw ProtocolError("prediction for id '" + preds[i].sample_id +
                            "' lacks attention despite the declared capability");
      }
      for (const auto& e : *preds[i].attention) {
        masses_[i][canonical_word(e.token)] += e.weight;
      }
    }
  }

  // Summed attention of every occurrence of `word` in sample `i`.
  double mass(std::size_t i, const std::string& word) const {
    auto it = masses_[i].find(word);
    return it == masses_[i].end() ? 0.0 : it->second;
  }

 private:
  std::vector<std::unordered_map<std::string, double>> masses_;
};

inline double word_breadth(const LabeledCorpus& corpus, std::string_view word) {
  return CueIndex(corpus).breadth(canonical_word(word));
}

inline double label_skew(const LabeledCorpus& corpus, std::string_view word) {
  return CueIndex(corpus).label_skew(canonical_word(word));
}

inline double strength_from(const CueIndex& index, const AttentionCache& cache,
                            const std::string& word) {
  const auto& rows = index.containing(word);
  if (rows.empty()) throw DataError("word '" + word + "' is absent from corpus");
  double total = 0.0;
  for (auto i : rows) total += cache.mass(i, word);
  return std::clamp(total / static_cast<double>(rows.size()), 0.0, 1.0);
}

inline double word_strength(const ModelHandle& model, const LabeledCorpus& corpus,
                            std::string_view word, std::size_t jobs = 1) {
  const std::string w = canonical_word(word);
  CueIndex index(corpus);
  if (index.containing(w).empty()) {
    throw DataError("word '" + w + "' is absent from corpus");
  }
  AttentionCache cache(model, corpus, jobs);
  return strength_from(index, cache, w);
}

inline bool scan_eligible(std::string_view word, const CueScanConfig& cfg) {
  return codepoint_length(word) >= cfg.min_token_length;
}

// Full statistics for every eligible word whose breadth clears b_min.
inline std::vector<CueStats> scan_candidates(const CueIndex& index,
                                             const AttentionCache& cache,
                                             const CueScanConfig& cfg) {
  validate(cfg);
  std::vector<CueStats> out;
  for (const auto& w : index.words()) {
    if (!scan_eligible(w, cfg)) continue;
    const double b = index.breadth(w);
    if (b < cfg.b_min) continue;
    CueStats st;
    st.word = w;
    st.breadth_b = b;
    st.n_containing = index.containing(w).size();
    st.false_share = index.label_skew(w);
    st.strength_s = strength_from(index, cache, w);
    out.push_back(std::move(st));
  }
  return out;
}

inline void sort_by_strength(std::vector<CueStats>& v) {
  std::stable_sort(v.begin(), v.end(), [](const CueStats& x, const CueStats& y) {
    if (x.strength_s != y.strength_s) return x.strength_s > y.strength_s;
    return x.word < y.word;
  });
}

struct CueScanResult {
  std::vector<CueStats> flagged;  // sorted by strength, descending
  std::size_t n_candidates = 0;   // words that cleared the breadth filter
  std::size_t n_samples = 0;
};

inline CueScanResult scan_detailed(const ModelHandle& model, const LabeledCorpus& corpus,
                                   const CueScanConfig& cfg, std::size_t jobs = 1) {
  validate(cfg);
  CueIndex index(corpus);
  AttentionCache cache(model, corpus, jobs);
  auto candidates = scan_candidates(index, cache, cfg);
  CueScanResult r;
  r.n_candidates = candidates.size();
  r.n_samples = corpus.size();
  for (auto& c : candidates) {
    if (c.strength_s >= cfg.s_min) r.flagged.push_back(std::move(c));
  }
  sort_by_strength(r.flagged);
  return r;
}

inline std::vector<CueStats> scan(const ModelHandle& model, const LabeledCorpus& corpus,
                                  const CueScanConfig& cfg = {}, std::size_t jobs = 1) {
  return scan_detailed(model, corpus, cfg, jobs).flagged;
}

}  // namespace rumorbench
