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

// Attention-weighted bag-of-words classifier, trained from scratch.
//
//   alpha = softmax(a[token_1..n])
//   z     = sum_t alpha_t * w[token_t] + bias
//   score = logistic(z)            (probability of label False)
//
// Index 0 of the vocabulary is a shared out-of-vocabulary slot.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/protocol.hpp"
#include "rumorbench/tokenize.hpp"

namespace rumorbench {

// The tokenizer cannot produce this string, so it never collides with a word.
inline constexpr std::string_view kOovToken = "<oov>";

struct TrainConfig {
  int epochs = 8;
  double learning_rate = 0.3;  // applied to gradients summed over a batch
  std::uint64_t seed = 0;
  double l2 = 1e-4;
  std::size_t batch_size = 32;
};

struct ForwardResult {
  double z = 0.0;
  double score = 0.5;
  AttentionVector attention;
};

// Sparse gradient of the binary cross-entropy for one example.
struct Gradient {
  std::map<std::size_t, double> w;
  std::map<std::size_t, double> a;
  double bias = 0.0;
  double loss = 0.0;
};

namespace detail {

inline double logistic(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
inline double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace detail

class RefModel {
 public:
  RefModel() : RefModel(std::vector<std::string>{}) {}

  // `words` excludes the OOV slot, which is always prepended.
  explicit RefModel(std::vector<std::string> words) {
    vocab_.reserve(words.size() + 1);
    vocab_.emplace_back(kOovToken);
    for (auto& word : words) vocab_.push_back(std::move(word));
    rebuild_index();
    w_.assign(vocab_.size(), 0.0);
    a_.assign(vocab_.size(), 0.0);
  }

  RefModel(std::vector<std::string> vocab_with_oov, std::vector<double> w,
           std::vector<double> a, double bias)
      : vocab_(std::move(vocab_with_oov)), w_(std::move(w)), a_(std::move(a)),
        bias_(bias) {
    if (vocab_.empty() || vocab_.front() != kOovToken) {
      throw DataError("model vocabulary must start with the OOV slot");
    }
    if (w_.size() != vocab_.size() || a_.size() != vocab_.size()) {
      throw DataError("model parameter vectors do not match vocabulary size");
    }
    rebuild_index();
  }

  std::size_t vocab_size() const { return vocab_.size(); }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::vector<double>& w() { return w_; }
  std::vector<double>& a() { return a_; }
  const std::vector<double>& w() const { return w_; }
  const std::vector<double>& a() const { return a_; }
  double& bias() { return bias_; }
  double bias() const { return bias_; }

  std::size_t index_of(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? 0 : it->second;
  }

  std::vector<std::size_t> encode(std::span<const std::string> tokens) const {
    std::vector<std::size_t> ids;
    ids.reserve(tokens.size());
    for (const auto& t : tokens) ids.push_back(index_of(t));
    return ids;
  }

  ForwardResult forward(std::span<const std::string> tokens) const {
    if (tokens.empty()) throw DataError("forward: empty token list");
    const auto ids = encode(tokens);
    const auto alpha = softmax(ids);
    ForwardResult r;
    r.attention.reserve(tokens.size());
    double z = bias_;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      z += alpha[t] * w_[ids[t]];
      r.attention.push_back({tokens[t], alpha[t]});
    }
    r.z = z;
    r.score = detail::logistic(z);
    return r;
  }

  ForwardResult forward_text(std::string_view text) const {
    const auto tokens = tokenize(text);
    return forward(tokens);
  }

  // Gradient of BCE(logistic(z), y) where y = 1 means label False.
  Gradient gradient(std::span<const std::string> tokens, double y) const {
    if (tokens.empty()) throw DataError("gradient: empty token list");
    const auto ids = encode(tokens);
    const auto alpha = softmax(ids);
    double mix = 0.0;  // attention-weighted w, without bias
    for (std::size_t t = 0; t < ids.size(); ++t) mix += alpha[t] * w_[ids[t]];
    const double z = mix + bias_;
    const double residual = detail::logistic(z) - y;
    Gradient g;
    g.loss = detail::softplus(z) - y * z;
    g.bias = residual;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      g.w[ids[t]] += residual * alpha[t];
      g.a[ids[t]] += residual * alpha[t] * (w_[ids[t]] - mix);
    }
    return g;
  }

  // Model file: {"vocab": {token: index}, "w": [...], "a": [...], "bias": x,
  // "tokenizer_version": "..."}.
  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json vocab = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < vocab_.size(); ++i) vocab[vocab_[i]] = i;
    return {{"vocab", vocab},
            {"w", w_},
            {"a", a_},
            {"bias", bias_},
            {"tokenizer_version", kTokenizerVersion}};
  }

  static RefModel from_json(const nlohmann::json& j) {
    try {
      const auto version = j.at("tokenizer_version").get<std::string>();
      if (version != kTokenizerVersion) {
        throw DataError("model tokenizer_version '" + version +
                        "' does not match '" + std::string(kTokenizerVersion) + "'");
      }
      const auto& vj = j.at("vocab");
      std::vector<std::string> vocab(vj.size());
      std::vector<bool> filled(vj.size(), false);
      for (auto it = vj.begin(); it != vj.end(); ++it) {
        const auto idx = it.value().get<std::size_t>();
        if (idx >= vocab.size() || filled[idx]) {
          throw DataError("model vocab indices must be a permutation of 0..n-1");
        }
        vocab[idx] = it.key();
        filled[idx] = true;
      }
      return RefModel(std::move(vocab), j.at("w").get<std::vector<double>>(),
                      j.at("a").get<std::vector<double>>(), j.at("bias").get<double>());
    } catch (const nlohmann::json::exception& e) {
      throw DataError(std::string("malformed model file: ") + e.what());
    }
  }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model file " + path.string());
    out << to_json().dump() << '\n';
  }

  static RefModel load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model file " + path.string());
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("malformed model file " + path.string() + ": " + e.what());
    }
    return from_json(j);
  }

  friend bool operator==(const RefModel& x, const RefModel& y) {
    return x.vocab_ == y.vocab_ && x.w_ == y.w_ && x.a_ == y.a_ && x.bias_ == y.bias_;
  }

 private:
  std::vector<double> softmax(const std::vector<std::size_t>& ids) const {
    double peak = a_[ids[0]];
    for (auto id : ids) peak = std::max(peak, a_[id]);
    std::vector<double> alpha(ids.size());
    double total = 0.0;
    for (std::size_t t = 0; t < ids.size(); ++t) {
      alpha[t] = std::exp(a_[ids[t]] - peak);
      total += alpha[t];
    }
    for (auto& x : alpha) x /= total;
    return alpha;
  }

  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 1; i < vocab_.size(); ++i) index_.emplace(vocab_[i], i);
  }

  std::vector<std::string> vocab_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<double> w_;
  std::vector<double> a_;
  double bias_ = 0.0;
};

struct TrainResult {
  RefModel model;
  double train_accuracy = 0.0;
  double final_loss = 0.0;  // mean BCE over the corpus after training
};

inline double target_for(Label l) { return l == Label::False ? 1.0 : 0.0; }

// Mini-batch gradient descent on binary cross-entropy. Parameters start at
// zero; the seed drives the per-epoch shuffle only.
inline TrainResult train(const LabeledCorpus& corpus, const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw DataError("epochs must be >= 1");
  if (!(cfg.learning_rate > 0.0)) throw DataError("learning_rate must be > 0");
  if (!(cfg.l2 >= 0.0)) throw DataError("l2 must be >= 0");
  if (cfg.batch_size == 0) throw DataError("batch_size must be >= 1");
  const auto st = corpus_stats(corpus);
  if (st.n_true == 0 || st.n_false == 0) {
    throw DataError("training corpus '" + corpus.name() + "' has a single label");
  }

  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(corpus.size());
  std::vector<std::string> words;
  for (const auto& s : corpus) {
    tokens.push_back(tokenize(s.text));
    if (tokens.back().empty()) {
      throw DataError("sample '" + s.id + "' has no tokens");
    }
    words.insert(words.end(), tokens.back().begin(), tokens.back().end());
  }
  std::sort(words.begin(), words.end());
  words.erase(std::unique(words.begin(), words.end()), words.end());
  RefModel m(std::move(words));

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(cfg.seed);
  const double decay = cfg.learning_rate * cfg.l2;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      std::map<std::size_t, double> gw;
      std::map<std::size_t, double> ga;
      double gb = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = order[k];
        const auto g = m.gradient(tokens[i], target_for(corpus[i].label));
        for (auto [idx, v] : g.w) gw[idx] += v;
        for (auto [idx, v] : g.a) ga[idx] += v;
        gb += g.bias;
      }
      const double shrink = 1.0 - decay * static_cast<double>(stop - start);
      for (auto& x : m.w()) x *= shrink;
      for (auto& x : m.a()) x *= shrink;
      for (auto [idx, v] : gw) m.w()[idx] -= cfg.learning_rate * v;
      for (auto [idx, v] : ga) m.a()[idx] -= cfg.learning_rate * v;
      m.bias() -= cfg.learning_rate * gb;
    }
  }

  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto r = m.forward(tokens[i]);
    correct += label_for_score(r.score) == corpus[i].label;
    const double y = target_for(corpus[i].label);
    loss += detail::softplus(r.z) - y * r.z;
  }
  const auto n = static_cast<double>(corpus.size());
  return TrainResult{std::move(m), static_cast<double>(correct) / n, loss / n};
}

// In-process adapter over a trained model. Always advertises attention.
class ReferenceAdapter : public Adapter {
 public:
  explicit ReferenceAdapter(RefModel model, std::string name = "reference")
      : model_(std::move(model)), name_(std::move(name)) {}

  HelloInfo hello() override {
    return HelloInfo{name_, {std::string(kAttentionCapability)}};
  }

  std::vector<PredictOutcome> predict(std::span<const Sample> samples) override {
    std::vector<PredictOutcome> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
      const auto tokens = tokenize(s.text);
      if (tokens.empty()) {
        out.push_back({s.id, std::nullopt, "text has no tokens"});
        continue;
      }
      auto r = model_.forward(tokens);
      out.push_back({s.id, make_prediction(s.id, r.score, std::move(r.attention)), {}});
    }
    return out;
  }

  bool concurrent() const override { return true; }

  const RefModel& model() const { return model_; }

 private:
  RefModel model_;
  std::string name_;
};

}  // namespace rumorbench
