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

// Prediction protocol: value types, the JSON wire codec and the ModelHandle
// that enforces the protocol contract on top of any transport.
//
// Wire format (one JSON object per message):
//   hello request     {"op":"hello"}
//   hello response    {"name": str, "capabilities": [str]}
//   predict request   {"op":"predict","id": str,"text": str}
//   predict response  {"id": str,"label":"true"|"false","score": num,
//                      "attention":[{"token": str,"weight": num}]?}
//   failure response  {"id": str,"error": str}

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"

namespace rumorbench {

inline constexpr double kAttentionSumTolerance = 1e-6;
inline constexpr std::string_view kAttentionCapability = "attention";

struct AttentionEntry {
  std::string token;
  double weight = 0.0;

  friend bool operator==(const AttentionEntry&, const AttentionEntry&) = default;
};

// Per-token attention in sentence order. Non-empty vectors sum to 1.
using AttentionVector = std::vector<AttentionEntry>;

inline double attention_sum(const AttentionVector& v) {
  double s = 0.0;
  for (const auto& e : v) s += e.weight;
  return s;
}

inline bool attention_is_normalized(const AttentionVector& v,
                                    double tol = kAttentionSumTolerance) {
  if (v.empty()) return true;
  for (const auto& e : v) {
    if (!(e.weight >= 0.0 && e.weight <= 1.0 + tol)) return false;
  }
  return std::abs(attention_sum(v) - 1.0) <= tol;
}

struct Prediction {
  std::string sample_id;
  Label label = Label::True;
  double score = 0.0;  // probability of label False
  std::optional<AttentionVector> attention;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

inline Prediction make_prediction(std::string id, double score,
                                  std::optional<AttentionVector> attention = std::nullopt) {
  return Prediction{std::move(id), label_for_score(score), score, std::move(attention)};
}

struct HelloInfo {
  std::string name;
  std::set<std::string> capabilities;
};

// Outcome of one predict request: a prediction, or the adapter's error text.
struct PredictOutcome {
  std::string sample_id;
  std::optional<Prediction> prediction;
  std::string error;
};

// ---------------------------------------------------------------------------
// Wire codec

namespace wire {

inline nlohmann::ordered_json hello_request() { return {{"op", "hello"}}; }

inline nlohmann::ordered_json predict_request(const Sample& s) {
  return {{"op", "predict"}, {"id", s.id}, {"text", s.text}};
}

inline nlohmann::ordered_json hello_response(const HelloInfo& h) {
  nlohmann::ordered_json caps = nlohmann::ordered_json::array();
  for (const auto& c : h.capabilities) caps.push_back(c);
  return {{"name", h.name}, {"capabilities", caps}};
}

inline nlohmann::ordered_json prediction_response(const Prediction& p) {
  nlohmann::ordered_json j{{"id", p.sample_id},
                           {"label", std::string(to_string(p.label))},
                           {"score", p.score}};
  if (p.attention) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& e : *p.attention) {
      arr.push_back({{"token", e.token}, {"weight", e.weight}});
    }
    j["attention"] = std::move(arr);
  }
  return j;
}

inline HelloInfo parse_hello(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("malformed hello response: not an object");
  auto name = j.find("name");
  if (name == j.end() || !name->is_string()) {
    throw ProtocolError("malformed hello response: missing string 'name'");
  }
  HelloInfo h;
  h.name = name->get<std::string>();
  if (auto caps = j.find("capabilities"); caps != j.end() && !caps->is_null()) {
    if (!caps->is_array()) {
      throw ProtocolError("malformed hello response: 'capabilities' must be an array");
    }
    for (const auto& c : *caps) {
      if (!c.is_string()) {
        throw ProtocolError("malformed hello response: capability must be a string");
      }
      h.capabilities.insert(c.get<std::string>());
    }
  }
  return h;
}

// Parses one predict response object. Throws ProtocolError on schema
// violations; returns an outcome without prediction for error responses.
inline PredictOutcome parse_predict_response(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("predict response is not a JSON object");
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) {
    throw ProtocolError("predict response lacks string 'id'");
  }
  PredictOutcome out;
  out.sample_id = id->get<std::string>();
  if (auto err = j.find("error"); err != j.end() && !err->is_null()) {
    out.error = err->is_string() ? err->get<std::string>() : err->dump();
    return out;
  }
  const std::string where = "response for id '" + out.sample_id + "'";
  auto label = j.find("label");
  if (label == j.end() || !label->is_string()) {
    throw ProtocolError(where + " lacks string 'label'");
  }
  const auto& ls = label->get_ref<const std::string&>();
  if (ls != "true" && ls != "false") {
    throw ProtocolError(where + ": label must be \"true\" or \"false\", got \"" + ls + "\"");
  }
  auto score = j.find("score");
  if (score == j.end() || !score->is_number()) {
    throw ProtocolError(where + " lacks numeric 'score'");
  }
  Prediction p;
  p.sample_id = out.sample_id;
  p.label = ls == "true" ? Label::True : Label::False;
  p.score = score->get<double>();
  if (!(p.score >= 0.0 && p.score <= 1.0)) {
    throw ProtocolError(where + ": score outside [0,1]");
  }
  if (label_for_score(p.score) != p.label) {
    throw ProtocolError(where + ": label disagrees with score at threshold 0.5");
  }
  if (auto att = j.find("attention"); att != j.end() && !att->is_null()) {
    if (!att->is_array()) throw ProtocolError(where + ": 'attention' must be an array");
    AttentionVector v;
    for (const auto& e : *att) {
      if (!e.is_object() || !e.contains("token") || !e["token"].is_string() ||
          !e.contains("weight") || !e["weight"].is_number()) {
        throw ProtocolError(where + ": malformed attention entry");
      }
      v.push_back({e["token"].get<std::string>(), e["weight"].get<double>()});
    }
    p.attention = std::move(v);
  }
  out.prediction = std::move(p);
  return out;
}

}  // namespace wire

// ---------------------------------------------------------------------------
// Transport interface

enum class ModelKind : std::uint8_t { Reference, Subprocess, Http };

inline constexpr std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Reference: return "reference";
    case ModelKind::Subprocess: return "subprocess";
    case ModelKind::Http: return "http";
  }
  return "unknown";
}

// A transport delivers hello and predict messages. It does no validation
// beyond parsing; ModelHandle checks the protocol contract.
class Adapter {
 public:
  virtual ~Adapter() = default;
  virtual HelloInfo hello() = 0;
  // One outcome per answered request, in whatever order the peer replied.
  virtual std::vector<PredictOutcome> predict(std::span<const Sample> samples) = 0;
  // True when predict() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
};

// A connected model. Construction performs the handshake, so every handle is
// ready for predict_batch.
class ModelHandle {
 public:
  ModelHandle(ModelKind kind, std::string address, std::unique_ptr<Adapter> adapter)
      : kind_(kind), address_(std::move(address)), adapter_(std::move(adapter)) {
    hello_ = adapter_->hello();
  }

  ModelKind kind() const { return kind_; }
  const std::string& address() const { return address_; }
  const std::string& name() const { return hello_.name; }
  const std::set<std::string>& capabilities() const { return hello_.capabilities; }
  bool has_attention() const {
    return hello_.capabilities.contains(std::string(kAttentionCapability));
  }
  bool concurrent() const { return adapter_->concurrent(); }

  // Outcomes in input order. Error responses are kept (prediction empty);
  // a missing, duplicate or unknown id is a ProtocolError.
  std::vector<PredictOutcome> predict_outcomes(std::span<const Sample> samples) const {
    if (samples.empty()) return {};
    auto raw = adapter_->predict(samples);
    std::unordered_map<std::string, std::size_t> slot;
    slot.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) slot.emplace(samples[i].id, i);
    std::vector<std::optional<PredictOutcome>> ordered(samples.size());
    for (auto& o : raw) {
      auto it = slot.find(o.sample_id);
      if (it == slot.end()) {
        throw ProtocolError("response for unknown id '" + o.sample_id + "'");
      }
      if (ordered[it->second]) {
        throw ProtocolError("duplicate response for id '" + o.sample_id + "'");
      }
      if (o.prediction) check_prediction(*o.prediction);
      ordered[it->second] = std::move(o);
    }
    std::vector<PredictOutcome> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!ordered[i]) {
        throw ProtocolError("missing response for id '" + samples[i].id + "'");
      }
      out.push_back(std::move(*ordered[i]));
    }
    return out;
  }

  // Strict variant: any per-sample error response fails the batch.
  std::vector<Prediction> predict_batch(std::span<const Sample> samples) const {
    auto outcomes = predict_outcomes(samples);
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

  std::vector<Prediction> predict_batch(const LabeledCorpus& c) const {
    return predict_batch(std::span<const Sample>(c.samples()));
  }

 private:
  void check_prediction(Prediction& p) const {
    if (!p.attention) return;
    if (!has_attention()) {
      // Undeclared attention is dropped rather than trusted.
      p.attention.reset();
      return;
    }
    if (!attention_is_normalized(*p.attention)) {
      throw ProtocolError("attention for id '" + p.sample_id +
                          "' does not sum to 1 within 1e-6");
    }
  }

  ModelKind kind_;
  std::string address_;
  std::unique_ptr<Adapter> adapter_;
  HelloInfo hello_;
};

}  // namespace rumorbench
