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

// Classification metrics with False (rumor) as the positive class, and the
// trained-on x evaluated-on cross-dataset matrix.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/parallel.hpp"
#include "rumorbench/protocol.hpp"

namespace rumorbench {

struct ConfusionCounts {
  std::size_t tp = 0;  // gold False, predicted False
  std::size_t fp = 0;  // gold True,  predicted False
  std::size_t fn = 0;  // gold False, predicted True
  std::size_t tn = 0;  // gold True,  predicted True

  std::size_t total() const { return tp + fp + fn + tn; }

  void add(Label gold, Label predicted) {
    if (gold == Label::False) {
      (predicted == Label::False ? tp : fn) += 1;
    } else {
      (predicted == Label::False ? fp : tn) += 1;
    }
  }

  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct MetricBundle {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  friend bool operator==(const MetricBundle&, const MetricBundle&) = default;
};

// Predictions are matched to gold samples by id; the id sets must be equal.
inline ConfusionCounts confusion(std::span<const Prediction> preds,
                                 std::span<const Sample> gold) {
  std::unordered_map<std::string, Label> predicted;
  predicted.reserve(preds.size());
  for (const auto& p : preds) {
    if (!predicted.emplace(p.sample_id, p.label).second) {
      throw DataError("duplicate prediction for id '" + p.sample_id + "'");
    }
  }
  if (predicted.size() != gold.size()) {
    throw DataError("prediction/gold id mismatch: " + std::to_string(predicted.size()) +
                    " predictions for " + std::to_string(gold.size()) + " samples");
  }
  ConfusionCounts c;
  for (const auto& s : gold) {
    auto it = predicted.find(s.id);
    if (it == predicted.end()) {
      throw DataError("prediction/gold id mismatch: no prediction for '" + s.id + "'");
    }
    c.add(s.label, it->second);
  }
  return c;
}

inline ConfusionCounts confusion(std::span<const Prediction> preds,
                                 const LabeledCorpus& gold) {
  return confusion(preds, std::span<const Sample>(gold.samples()));
}

inline MetricBundle bundle(const ConfusionCounts& c) {
  const std::size_t total = c.total();
  if (total == 0) throw DataError("cannot compute metrics over zero samples");
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  MetricBundle m;
  m.accuracy = ratio(c.tp + c.tn, total);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = (m.precision + m.recall) == 0.0
             ? 0.0
             : 2.0 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

inline MetricBundle evaluate(const ModelHandle& model, const LabeledCorpus& corpus,
                             std::size_t jobs = 1) {
  const auto preds = predict_pooled(model, corpus.samples(), jobs);
  return bundle(confusion(preds, corpus));
}

struct EvalMatrix {
  std::vector<std::string> trained_on;
  std::vector<std::string> evaluated_on;
  // cells[i][j]; empty when row i failed.
  std::vector<std::vector<std::optional<MetricBundle>>> cells;
  std::vector<std::optional<std::string>> row_errors;

  // Model-on-self cell: names equal once a "-train"/"-test" suffix is dropped.
  bool is_self(std::size_t i, std::size_t j) const {
    return base_name(trained_on[i]) == base_name(evaluated_on[j]);
  }

  static std::string_view base_name(std::string_view name) {
    for (std::string_view suffix : {"-train", "-test"}) {
      if (name.size() > suffix.size() && name.ends_with(suffix)) {
        return name.substr(0, name.size() - suffix.size());
      }
    }
    return name;
  }
};

// Evaluates every model on every corpus. An adapter failure voids that row
// only. `names` overrides the handshake names used for rows.
inline EvalMatrix cross_eval(std::span<const ModelHandle* const> models,
                             std::span<const LabeledCorpus> tests, std::size_t jobs = 1,
                             std::span<const std::string> names = {}) {
  if (models.empty()) throw DataError("cross_eval needs at least one model");
  if (tests.empty()) throw DataError("cross_eval needs at least one corpus");
  EvalMatrix m;
  for (std::size_t i = 0; i < models.size(); ++i) {
    m.trained_on.push_back(i < names.size() ? names[i] : models[i]->name());
  }
  for (const auto& t : tests) m.evaluated_on.push_back(t.name());
  m.cells.assign(models.size(), std::vector<std::optional<MetricBundle>>(tests.size()));
  m.row_errors.assign(models.size(), std::nullopt);

  std::vector<std::optional<std::string>> cell_errors(models.size() * tests.size());
  // Subprocess handles serialize their stream, so rows run one cell at a
  // time per model; independent cells still spread across the pool.
  parallel_for(models.size() * tests.size(), jobs, [&](std::size_t k) {
    const std::size_t i = k / tests.size();
    const std::size_t j = k % tests.size();
    try {
      m.cells[i][j] = evaluate(*models[i], tests[j], 1);
    } catch (const Error& e) {
      cell_errors[k] = e.what();
    }
  });
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < tests.size(); ++j) {
      if (cell_errors[i * tests.size() + j]) {
        m.row_errors[i] = "evaluating on '" + tests[j].name() +
                          "': " + *cell_errors[i * tests.size() + j];
        break;
      }
    }
    if (m.row_errors[i]) {
      for (auto& cell : m.cells[i]) cell.reset();
    }
  }
  return m;
}

}  // namespace rumorbench
