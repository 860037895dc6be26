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

// Result rendering. A ReportDocument is an ordered list of typed sections,
// each carrying a JSON payload; render() turns it into JSON, Markdown or a
// long-format CSV (section,kind,row,column,value). JSON keeps full precision;
// Markdown rounds percentages to two decimals and strengths to four.

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/cuescan.hpp"
#include "rumorbench/metrics.hpp"
#include "rumorbench/pairt.hpp"
#include "rumorbench/perturb.hpp"

namespace rumorbench {

using ojson = nlohmann::ordered_json;

enum class ReportFormat : std::uint8_t { Json, Markdown, Csv };

inline ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "markdown" || s == "md") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  throw Error("unknown output format '" + std::string(s) + "'");
}

struct ReportSection {
  std::string kind;
  std::string title;
  ojson payload;
};

struct ReportDocument {
  std::string title;
  std::vector<ReportSection> sections;
  std::optional<std::string> generated_at;
  ojson config_echo = ojson::object();
};

inline const std::vector<std::string_view>& section_kinds() {
  static const std::vector<std::string_view> kinds = {
      "corpus_stats", "metrics",     "eval_matrix", "pairt",
      "cues",         "adversarial", "consistency", "summary"};
  return kinds;
}

inline bool known_section_kind(std::string_view k) {
  for (auto x : section_kinds()) {
    if (x == k) return true;
  }
  return false;
}

// ISO-8601 UTC timestamp from SOURCE_DATE_EPOCH, if set.
inline std::optional<std::string> reproducible_timestamp() {
  const char* env = std::getenv("SOURCE_DATE_EPOCH");
  if (env == nullptr || *env == '\0') return std::nullopt;
  char* end = nullptr;
  const long long secs = std::strtoll(env, &end, 10);
  if (*end != '\0' || secs < 0) return std::nullopt;
  const std::time_t t = static_cast<std::time_t>(secs);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Payload builders

inline ojson metrics_json(const MetricBundle& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

inline MetricBundle metrics_from_json(const nlohmann::json& j) {
  return {j.at("accuracy").get<double>(), j.at("precision").get<double>(),
          j.at("recall").get<double>(), j.at("f1").get<double>()};
}

inline ReportSection stats_section(std::span<const CorpusStats> stats) {
  ojson rows = ojson::array();
  for (const auto& s : stats) {
    rows.push_back({{"dataset", s.name},
                    {"n_true", s.n_true},
                    {"n_false", s.n_false},
                    {"n_total", s.n_total},
                    {"false_pct", s.false_pct}});
  }
  return {"corpus_stats", "Corpus statistics", {{"rows", rows}}};
}

struct NamedMetrics {
  std::string model;
  std::string corpus;
  MetricBundle metrics;
};

inline ReportSection metrics_section(std::span<const NamedMetrics> rows_in) {
  ojson rows = ojson::array();
  for (const auto& r : rows_in) {
    ojson row = {{"model", r.model}, {"corpus", r.corpus}};
    const ojson m = metrics_json(r.metrics);
    for (const auto& [k, v] : m.items()) row[k] = v;
    rows.push_back(std::move(row));
  }
  return {"metrics", "Metrics (positive class: False)", {{"rows", rows}}};
}

inline ReportSection eval_matrix_section(const EvalMatrix& m) {
  ojson cells = ojson::array();
  for (std::size_t i = 0; i < m.trained_on.size(); ++i) {
    ojson row = ojson::array();
    for (std::size_t j = 0; j < m.evaluated_on.size(); ++j) {
      row.push_back(m.cells[i][j] ? metrics_json(*m.cells[i][j]) : ojson(nullptr));
    }
    cells.push_back(std::move(row));
  }
  ojson errors = ojson::array();
  for (const auto& e : m.row_errors) errors.push_back(e ? ojson(*e) : ojson(nullptr));
  ojson self = ojson::array();
  for (std::size_t i = 0; i < m.trained_on.size(); ++i) {
    for (std::size_t j = 0; j < m.evaluated_on.size(); ++j) {
      if (m.is_self(i, j)) self.push_back({i, j});
    }
  }
  return {"eval_matrix",
          "Cross-dataset F1 (rows: trained on, columns: evaluated on)",
          {{"trained_on", m.trained_on},
           {"evaluated_on", m.evaluated_on},
           {"cells", cells},
           {"row_errors", errors},
           {"self_cells", self}}};
}

struct NamedPairT {
  std::string model;
  PairTResult result;
};

inline ReportSection pairt_section(std::span<const PairedCase> pairs,
                                   std::span<const NamedPairT> models) {
  ojson jp = ojson::array();
  for (const auto& p : pairs) jp.push_back(pair_to_json(p));
  ojson jm = ojson::array();
  const auto label_or_null = [](const std::optional<Label>& l) {
    return l ? ojson(std::string(to_string(*l))) : ojson(nullptr);
  };
  for (const auto& m : models) {
    ojson preds = ojson::array();
    for (const auto& o : m.result.per_pair) {
      preds.push_back({{"pair_id", o.pair_id},
                       {"a", label_or_null(o.a_predicted)},
                       {"b", label_or_null(o.b_predicted)},
                       {"a_correct", o.a_correct},
                       {"b_correct", o.b_correct}});
    }
    jm.push_back({{"model", m.model},
                  {"n_pairs", m.result.n_pairs},
                  {"n_pairs_correct", m.result.n_pairs_correct},
                  {"n_samples_correct", m.result.n_samples_correct},
                  {"n_failed_pairs", m.result.n_failed_pairs},
                  {"standard_accuracy", m.result.standard_accuracy},
                  {"pairt_accuracy", m.result.pairt_accuracy},
                  {"consistency_rate", m.result.consistency_rate},
                  {"predictions", preds}});
  }
  return {"pairt", "Paired test", {{"pairs", jp}, {"models", jm}}};
}

inline ReportSection cues_section(const CueScanResult& r, const CueScanConfig& cfg,
                                  const std::string& model) {
  ojson flagged = ojson::array();
  for (const auto& c : r.flagged) {
    flagged.push_back({{"word", c.word},
                       {"strength_s", c.strength_s},
                       {"breadth_b", c.breadth_b},
                       {"n_containing", c.n_containing},
                       {"false_share", c.false_share}});
  }
  return {"cues",
          "Spurious cue candidates",
          {{"model", model},
           {"s_min", cfg.s_min},
           {"b_min", cfg.b_min},
           {"min_token_length", cfg.min_token_length},
           {"n_samples", r.n_samples},
           {"n_candidates", r.n_candidates},
           {"flagged", flagged}}};
}

struct NamedAdversarial {
  std::string model;
  std::string corpus;
  AdversarialSummary summary;
};

inline ReportSection adversarial_section(std::span<const NamedAdversarial> rows_in) {
  ojson rows = ojson::array();
  for (const auto& r : rows_in) {
    rows.push_back({{"model", r.model},
                    {"corpus", r.corpus},
                    {"n", r.summary.n},
                    {"acc_original", r.summary.acc_original},
                    {"acc_adversarial", r.summary.acc_adversarial},
                    {"drop_points", r.summary.drop_points}});
  }
  return {"adversarial", "Accuracy under adversarial rewrites", {{"rows", rows}}};
}

struct NamedConsistency {
  std::string model;
  std::string probe;
  ConsistencySummary summary;
};

inline ReportSection consistency_section(std::span<const NamedConsistency> rows_in) {
  ojson rows = ojson::array();
  for (const auto& r : rows_in) {
    rows.push_back({{"model", r.model},
                    {"probe", r.probe},
                    {"n", r.summary.n},
                    {"n_flipped", r.summary.n_flipped},
                    {"flip_rate", r.summary.flip_rate}});
  }
  return {"consistency", "Prediction flips under cue injection", {{"rows", rows}}};
}

inline ReportSection summary_section(std::string title, ojson fields) {
  if (!fields.is_object()) throw Error("summary payload must be an object");
  return {"summary", std::move(title), std::move(fields)};
}

// ---------------------------------------------------------------------------
// Number formatting

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

inline std::string pct(double fraction) { return fixed(100.0 * fraction, 2); }

namespace detail {

inline std::string md_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n' || c == '\r') out += ' ';
    else out += c;
  }
  return out;
}

inline std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

// "false" -> "False", as the tables print labels.
inline std::string display_label(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string md_row(const std::vector<std::string>& cells) {
  std::string s = "|";
  for (const auto& c : cells) s += " " + c + " |";
  return s + "\n";
}

inline std::string md_rule(std::size_t n) {
  std::string s = "|";
  for (std::size_t i = 0; i < n; ++i) s += " --- |";
  return s + "\n";
}

inline void md_stats(std::ostream& out, const nlohmann::json& p) {
  out << md_row({"Dataset", "True", "False", "Total", "False %"}) << md_rule(5);
  for (const auto& r : p.at("rows")) {
    out << md_row({md_escape(r.at("dataset").get<std::string>()),
                   scalar_text(r.at("n_true")), scalar_text(r.at("n_false")),
                   scalar_text(r.at("n_total")), pct(r.at("false_pct").get<double>())});
  }
}

inline void md_metrics(std::ostream& out, const nlohmann::json& p) {
  out << md_row({"Model", "Corpus", "Accuracy", "Precision", "Recall", "F1"}) << md_rule(6);
  for (const auto& r : p.at("rows")) {
    out << md_row({md_escape(r.at("model").get<std::string>()),
                   md_escape(r.at("corpus").get<std::string>()),
                   pct(r.at("accuracy").get<double>()), pct(r.at("precision").get<double>()),
                   pct(r.at("recall").get<double>()), pct(r.at("f1").get<double>())});
  }
}

inline void md_eval_matrix(std::ostream& out, const nlohmann::json& p) {
  const auto& cols = p.at("evaluated_on");
  const auto& rows = p.at("trained_on");
  std::vector<std::vector<bool>> self(rows.size(), std::vector<bool>(cols.size(), false));
  for (const auto& ij : p.at("self_cells")) {
    self.at(ij.at(0).get<std::size_t>()).at(ij.at(1).get<std::size_t>()) = true;
  }
  std::vector<std::string> header = {"Trained on \\ Evaluated on"};
  for (const auto& c : cols) header.push_back(md_escape(c.get<std::string>()));
  out << md_row(header) << md_rule(header.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> line = {md_escape(rows[i].get<std::string>())};
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const auto& cell = p.at("cells").at(i).at(j);
      if (cell.is_null()) {
        line.push_back("n/a");
      } else {
        const auto f1 = pct(cell.at("f1").get<double>());
        line.push_back(self[i][j] ? "**" + f1 + "**" : f1);
      }
    }
    out << md_row(line);
  }
  bool any_self = false;
  for (const auto& r : self) {
    for (bool b : r) any_self = any_self || b;
  }
  if (any_self) out << "\nBold cells: model evaluated on its own test set.\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& e = p.at("row_errors").at(i);
    if (!e.is_null()) {
      out << "\nRow '" << md_escape(rows[i].get<std::string>())
          << "' failed: " << md_escape(e.get<std::string>()) << "\n";
    }
  }
}

inline void md_pairt(std::ostream& out, const nlohmann::json& p) {
  const auto& pairs = p.at("pairs");
  const auto& models = p.at("models");
  std::vector<std::string> header = {"#", "Sentence", "Gold"};
  for (const auto& m : models) header.push_back(md_escape(m.at("model").get<std::string>()));
  out << md_row(header) << md_rule(header.size());
  std::size_t row_no = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    for (const char* member : {"a", "b"}) {
      const auto& s = pairs[k].at(member);
      std::vector<std::string> line = {std::to_string(++row_no),
                                       md_escape(s.at("text").get<std::string>()),
                                       display_label(s.at("label").get<std::string>())};
      for (const auto& m : models) {
        const auto& pred = m.at("predictions").at(k);
        const auto& label = pred.at(member);
        const bool correct = pred.at(std::string(member) + "_correct").get<bool>();
        if (label.is_null()) {
          line.push_back("error");
        } else {
          const auto text = display_label(label.get<std::string>());
          line.push_back(correct ? "<u>" + text + "</u>" : text);
        }
      }
      out << md_row(line);
    }
  }
  out << "\nUnderlined predictions are correct.\n\n";
  out << md_row({"Model", "Standard accuracy", "PairT accuracy", "Consistency", "Failed pairs"})
      << md_rule(5);
  for (const auto& m : models) {
    out << md_row({md_escape(m.at("model").get<std::string>()),
                   pct(m.at("standard_accuracy").get<double>()),
                   pct(m.at("pairt_accuracy").get<double>()),
                   pct(m.at("consistency_rate").get<double>()),
                   scalar_text(m.at("n_failed_pairs"))});
  }
}

inline void md_cues(std::ostream& out, const nlohmann::json& p) {
  const auto& flagged = p.at("flagged");
  const auto s_min = p.at("s_min").get<double>();
  const auto b_min = p.at("b_min").get<double>();
  if (flagged.empty()) {
    out << "No cues crossed thresholds (s >= " << fixed(s_min, 4) << ", b >= " << pct(b_min)
        << "%) among " << scalar_text(p.at("n_candidates")) << " candidate words.\n";
    return;
  }
  out << md_row({"Word", "s", "b", "Samples", "False share"}) << md_rule(5);
  for (const auto& c : flagged) {
    out << md_row({md_escape(c.at("word").get<std::string>()),
                   fixed(c.at("strength_s").get<double>(), 4),
                   pct(c.at("breadth_b").get<double>()) + "%",
                   scalar_text(c.at("n_containing")),
                   pct(c.at("false_share").get<double>()) + "%"});
  }
  out << "\nThresholds: s >= " << fixed(s_min, 4) << ", b >= " << pct(b_min) << "%.\n";
}

inline void md_adversarial(std::ostream& out, const nlohmann::json& p) {
  const auto& rows = p.at("rows");
  std::vector<std::string> header = {""};
  for (const auto& r : rows) {
    header.push_back(md_escape(r.at("model").get<std::string>()) + " / " +
                     md_escape(r.at("corpus").get<std::string>()));
  }
  out << md_row(header) << md_rule(header.size());
  const auto line = [&](const char* name, const char* key, const char* suffix) {
    std::vector<std::string> cells = {name};
    for (const auto& r : rows) {
      const double v = r.at(key).get<double>();
      cells.push_back((std::string_view(key) == "drop_points" ? fixed(v, 2) : pct(v)) + suffix);
    }
    out << md_row(cells);
  };
  line("Original", "acc_original", "%");
  line("Adversarial", "acc_adversarial", "%");
  line("Drop", "drop_points", " pts");
}

inline void md_consistency(std::ostream& out, const nlohmann::json& p) {
  out << md_row({"Model", "Probe", "Samples", "Flipped", "Flip rate"}) << md_rule(5);
  for (const auto& r : p.at("rows")) {
    out << md_row({md_escape(r.at("model").get<std::string>()),
                   md_escape(r.at("probe").get<std::string>()), scalar_text(r.at("n")),
                   scalar_text(r.at("n_flipped")), pct(r.at("flip_rate").get<double>()) + "%"});
  }
}

inline void md_summary(std::ostream& out, const nlohmann::json& p) {
  out << md_row({"Field", "Value"}) << md_rule(2);
  for (const auto& [k, v] : p.items()) {
    out << md_row({md_escape(k), md_escape(v.is_string() ? v.get<std::string>() : v.dump())});
  }
}

// Long-format CSV rows for a payload: arrays become row indexes, objects
// become column names, nested containers are flattened with '.'.
inline void flatten(const nlohmann::json& v, const std::string& prefix,
                    std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) flatten(x, prefix.empty() ? k : prefix + "." + k, out);
  } else if (v.is_array()) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      flatten(v[i], prefix.empty() ? std::to_string(i) : prefix + "." + std::to_string(i), out);
    }
  } else {
    out.emplace_back(prefix, scalar_text(v));
  }
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline void check_sections(const ReportDocument& doc) {
  for (const auto& s : doc.sections) {
    if (!known_section_kind(s.kind)) throw Error("unknown report section kind '" + s.kind + "'");
  }
}

inline ojson to_json(const ReportDocument& doc) {
  check_sections(doc);
  ojson j = {{"title", doc.title}};
  if (doc.generated_at) j["generated_at"] = *doc.generated_at;
  j["config"] = doc.config_echo;
  ojson sections = ojson::array();
  for (const auto& s : doc.sections) {
    sections.push_back({{"kind", s.kind}, {"title", s.title}, {"payload", s.payload}});
  }
  j["sections"] = std::move(sections);
  return j;
}

inline ReportDocument parse_report(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("malformed report JSON: ") + e.what());
  }
  try {
    ReportDocument doc;
    doc.title = j.at("title").get<std::string>();
    if (j.contains("generated_at")) doc.generated_at = j["generated_at"].get<std::string>();
    doc.config_echo = j.value("config", ojson::object());
    for (const auto& s : j.at("sections")) {
      doc.sections.push_back(
          {s.at("kind").get<std::string>(), s.value("title", std::string()), s.at("payload")});
    }
    for (const auto& s : doc.sections) {
      if (!known_section_kind(s.kind)) throw DataError("unknown report section kind '" + s.kind + "'");
    }
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed report: ") + e.what());
  }
}

inline std::string render(const ReportDocument& doc, ReportFormat format) {
  check_sections(doc);
  std::ostringstream out;
  switch (format) {
    case ReportFormat::Json:
      out << to_json(doc).dump(2) << "\n";
      break;
    case ReportFormat::Markdown: {
      out << "# " << detail::md_escape(doc.title) << "\n";
      if (doc.generated_at) out << "\nGenerated at " << *doc.generated_at << ".\n";
      for (const auto& s : doc.sections) {
        out << "\n## " << detail::md_escape(s.title.empty() ? s.kind : s.title) << "\n\n";
        try {
          if (s.kind == "corpus_stats") detail::md_stats(out, s.payload);
          else if (s.kind == "metrics") detail::md_metrics(out, s.payload);
          else if (s.kind == "eval_matrix") detail::md_eval_matrix(out, s.payload);
          else if (s.kind == "pairt") detail::md_pairt(out, s.payload);
          else if (s.kind == "cues") detail::md_cues(out, s.payload);
          else if (s.kind == "adversarial") detail::md_adversarial(out, s.payload);
          else if (s.kind == "consistency") detail::md_consistency(out, s.payload);
          else detail::md_summary(out, s.payload);
        } catch (const nlohmann::json::exception& e) {
          throw DataError("malformed '" + s.kind + "' section: " + e.what());
        }
      }
      out << "\n## Configuration\n\n```json\n" << doc.config_echo.dump(2) << "\n```\n";
      break;
    }
    case ReportFormat::Csv: {
      out << "section,kind,field,value\n";
      for (std::size_t i = 0; i < doc.sections.size(); ++i) {
        std::vector<std::pair<std::string, std::string>> cells;
        detail::flatten(doc.sections[i].payload, "", cells);
        for (const auto& [field, value] : cells) {
          out << i << ',' << doc.sections[i].kind << ',' << detail::csv_field(field) << ','
              << detail::csv_field(value) << "\n";
        }
      }
      std::vector<std::pair<std::string, std::string>> cfg;
      detail::flatten(doc.config_echo, "", cfg);
      for (const auto& [field, value] : cfg) {
        out << "config,config," << detail::csv_field(field) << ',' << detail::csv_field(value)
            << "\n";
      }
      break;
    }
  }
  return out.str();
}

}  // namespace rumorbench
