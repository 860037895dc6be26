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

// Paired test: samples come in pairs with opposed labels and a pair counts
// only when both members are predicted correctly.

#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/parallel.hpp"
#include "rumorbench/protocol.hpp"

namespace rumorbench {

struct PairedCase {
  std::string pair_id;
  Sample a;
  Sample b;
};

inline void validate_pair(const PairedCase& p) {
  if (p.pair_id.empty()) throw DataError("pair with empty pair_id");
  if (p.a.label == p.b.label) {
    throw DataError("pair '" + p.pair_id + "' has equal labels (" +
                    std::string(to_string(p.a.label)) + ")");
  }
  if (p.a.id == p.b.id) {
    throw DataError("pair '" + p.pair_id + "' reuses sample id '" + p.a.id + "'");
  }
}

inline nlohmann::ordered_json pair_to_json(const PairedCase& p) {
  const auto member = [](const Sample& s) {
    return nlohmann::ordered_json{
        {"id", s.id}, {"text", s.text}, {"label", std::string(to_string(s.label))}};
  };
  return {{"pair_id", p.pair_id}, {"a", member(p.a)}, {"b", member(p.b)}};
}

inline std::vector<PairedCase> read_pairs(std::istream& in) {
  std::vector<PairedCase> out;
  std::unordered_set<std::string> pair_ids;
  std::unordered_set<std::string> sample_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object() || !j.contains("pair_id") || !j["pair_id"].is_string()) {
      throw DataError(where + ": missing string 'pair_id'");
    }
    PairedCase p;
    p.pair_id = j["pair_id"].get<std::string>();
    for (const char* member : {"a", "b"}) {
      if (!j.contains(member)) {
        throw DataError(where + ": pair '" + p.pair_id + "' lacks member '" + member + "'");
      }
    }
    p.a = sample_from_json(j["a"], where + " member a");
    p.b = sample_from_json(j["b"], where + " member b");
    validate_pair(p);
    if (!pair_ids.insert(p.pair_id).second) {
      throw DataError(where + ": duplicate pair_id '" + p.pair_id + "'");
    }
    for (const auto* s : {&p.a, &p.b}) {
      if (!sample_ids.insert(s->id).second) {
        throw DataError(where + ": duplicate sample id '" + s->id + "'");
      }
    }
    out.push_back(std::move(p));
  }
  return out;
}

inline std::vector<PairedCase> load_pairs(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open pair file " + path.string());
  try {
    return read_pairs(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_pairs(std::span<const PairedCase> pairs, std::ostream& out) {
  for (const auto& p : pairs) out << pair_to_json(p).dump() << '\n';
}

struct PairOutcome {
  std::string pair_id;
  bool a_correct = false;
  bool b_correct = false;
  std::optional<Label> a_predicted;  // empty when the adapter failed
  std::optional<Label> b_predicted;
  Label a_gold = Label::True;
  Label b_gold = Label::False;
  std::string a_text;
  std::string b_text;
  bool failed = false;
};

struct PairTResult {
  std::size_t n_pairs = 0;
  std::size_t n_pairs_correct = 0;
  std::size_t n_samples_correct = 0;
  std::size_t n_failed_pairs = 0;
  double standard_accuracy = 0.0;  // over the 2n paired samples
  double pairt_accuracy = 0.0;
  double consistency_rate = 0.0;  // pairs whose two predictions differ
  std::vector<PairOutcome> per_pair;
};

// Scores predictions (indexed like `pairs`; empty = adapter failure).
inline PairTResult score_pairs(std::span<const PairedCase> pairs,
                               std::span<const std::optional<Label>> a_pred,
                               std::span<const std::optional<Label>> b_pred) {
  if (pairs.empty()) throw DataError("PairT needs at least one pair");
  if (a_pred.size() != pairs.size() || b_pred.size() != pairs.size()) {
    throw DataError("PairT prediction count does not match pair count");
  }
  PairTResult r;
  r.n_pairs = pairs.size();
  std::size_t consistent = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& p = pairs[i];
    PairOutcome o;
    o.pair_id = p.pair_id;
    o.a_gold = p.a.label;
    o.b_gold = p.b.label;
    o.a_text = p.a.text;
    o.b_text = p.b.text;
    o.a_predicted = a_pred[i];
    o.b_predicted = b_pred[i];
    o.a_correct = a_pred[i] && *a_pred[i] == p.a.label;
    o.b_correct = b_pred[i] && *b_pred[i] == p.b.label;
    o.failed = !a_pred[i] || !b_pred[i];
    r.n_samples_correct += o.a_correct + o.b_correct;
    r.n_pairs_correct += o.a_correct && o.b_correct;
    r.n_failed_pairs += o.failed;
    consistent += a_pred[i] && b_pred[i] && *a_pred[i] != *b_pred[i];
    r.per_pair.push_back(std::move(o));
  }
  const auto n = static_cast<double>(r.n_pairs);
  r.standard_accuracy = static_cast<double>(r.n_samples_correct) / (2.0 * n);
  r.pairt_accuracy = static_cast<double>(r.n_pairs_correct) / n;
  r.consistency_rate = static_cast<double>(consistent) / n;
  return r;
}

inline PairTResult evaluate_pairt(const ModelHandle& model,
                                  std::span<const PairedCase> pairs, std::size_t jobs = 1) {
  if (pairs.empty()) throw DataError("PairT needs at least one pair");
  std::vector<Sample> flat;
  flat.reserve(2 * pairs.size());
  for (const auto& p : pairs) {
    flat.push_back(p.a);
    flat.push_back(p.b);
  }
  const auto outcomes = predict_outcomes_pooled(model, flat, jobs);
  std::vector<std::optional<Label>> a_pred(pairs.size());
  std::vector<std::optional<Label>> b_pred(pairs.size());
  std::size_t answered = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (outcomes[2 * i].prediction) a_pred[i] = outcomes[2 * i].prediction->label;
    if (outcomes[2 * i + 1].prediction) b_pred[i] = outcomes[2 * i + 1].prediction->label;
    answered += a_pred[i].has_value() + b_pred[i].has_value();
  }
  if (answered == 0) {
    throw ProtocolError("adapter failed on every paired sample");
  }
  return score_pairs(pairs, a_pred, b_pred);
}

}  // namespace rumorbench
