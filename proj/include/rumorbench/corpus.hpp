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

// Labeled corpora: loading (JSONL, CSV), writing, summary statistics and the
// stratified train/test split.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/tokenize.hpp"

namespace rumorbench {

enum class Split : std::uint8_t { Train, Test };

inline constexpr std::string_view to_string(Split s) {
  return s == Split::Train ? "train" : "test";
}

// Lineage of a derived sample (rewrite or injection).
struct Provenance {
  std::string source_id;
  std::string rule_id;

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct Sample {
  std::string id;
  std::string text;
  Label label = Label::True;
  std::optional<Split> split;
  std::optional<Provenance> provenance;

  friend bool operator==(const Sample&, const Sample&) = default;
};

// Case-insensitive label alias table shared by every input format.
inline std::optional<Label> parse_label(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    s.push_back(static_cast<char>(
        (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
  }
  if (s == "true" || s == "real" || s == "non-rumor" || s == "nonrumor" ||
      s == "0") {
    return Label::True;
  }
  if (s == "false" || s == "fake" || s == "rumor" || s == "1") {
    return Label::False;
  }
  return std::nullopt;
}

inline std::optional<Split> parse_split(std::string_view raw) {
  std::string s;
  for (char c : raw) {
    s.push_back(static_cast<char>(
        (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
  }
  if (s == "train") return Split::Train;
  if (s == "test") return Split::Test;
  return std::nullopt;
}

namespace detail {

inline bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  });
}

// Whitespace-only text counts as empty; this covers the Unicode spaces the
// tokenizer knows about as well.
inline bool is_effectively_empty(std::string_view text) {
  if (is_blank(text)) return true;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto d = decode_utf8(text, pos);
    if (!d) return false;
    if (!is_space(d->cp)) return false;
    pos += d->length;
  }
  return true;
}

}  // namespace detail

// Immutable, validated collection of samples. Ids are unique, texts are
// non-empty and valid UTF-8.
class LabeledCorpus {
 public:
  LabeledCorpus() = default;

  // Throws DataError naming the offending id when an invariant fails.
  LabeledCorpus(std::string name, std::vector<Sample> samples)
      : name_(std::move(name)), samples_(std::move(samples)) {
    index_.reserve(samples_.size());
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      const Sample& s = samples_[i];
      if (s.id.empty()) {
        throw DataError("sample #" + std::to_string(i + 1) + " has empty id");
      }
      if (!is_valid_utf8(s.text)) {
        throw DataError("sample '" + s.id + "' text is not valid UTF-8");
      }
      if (detail::is_effectively_empty(s.text)) {
        throw DataError("sample '" + s.id + "' has empty text");
      }
      if (!index_.emplace(s.id, i).second) {
        throw DataError("duplicate id '" + s.id + "'");
      }
    }
  }

  const std::string& name() const { return name_; }
  const std::vector<Sample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  auto begin() const { return samples_.begin(); }
  auto end() const { return samples_.end(); }

  const Sample* find(std::string_view id) const {
    auto it = index_.find(std::string(id));
    return it == index_.end() ? nullptr : &samples_[it->second];
  }

  LabeledCorpus renamed(std::string name) const {
    LabeledCorpus c = *this;
    c.name_ = std::move(name);
    return c;
  }

  friend bool operator==(const LabeledCorpus& a, const LabeledCorpus& b) {
    return a.name_ == b.name_ && a.samples_ == b.samples_;
  }

 private:
  std::string name_;
  std::vector<Sample> samples_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat : std::uint8_t { Jsonl, Csv };

inline CorpusFormat format_from_path(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".csv" || ext == ".CSV") return CorpusFormat::Csv;
  return CorpusFormat::Jsonl;
}

// ---------------------------------------------------------------------------
// JSONL

inline nlohmann::ordered_json sample_to_json(const Sample& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["text"] = s.text;
  j["label"] = std::string(to_string(s.label));
  if (s.split) j["split"] = std::string(to_string(*s.split));
  if (s.provenance) {
    j["provenance"] = {{"source_id", s.provenance->source_id},
                       {"rule_id", s.provenance->rule_id}};
  }
  return j;
}

// `where` prefixes error messages, e.g. "line 3".
inline Sample sample_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw DataError(where + ": expected a JSON object");
  const auto get_string = [&](const char* key, bool required) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) {
      if (required) throw DataError(where + ": missing field '" + key + "'");
      return std::nullopt;
    }
    if (!it->is_string()) {
      throw DataError(where + ": field '" + key + "' must be a string");
    }
    return it->get<std::string>();
  };
  Sample s;
  s.id = *get_string("id", true);
  s.text = *get_string("text", true);
  const std::string raw_label = *get_string("label", true);
  const auto label = parse_label(raw_label);
  if (!label) throw DataError(where + ": unknown label '" + raw_label + "'");
  s.label = *label;
  if (auto raw_split = get_string("split", false)) {
    s.split = parse_split(*raw_split);
    if (!s.split) throw DataError(where + ": unknown split '" + *raw_split + "'");
  }
  if (auto it = j.find("provenance"); it != j.end() && it->is_object()) {
    Provenance p;
    p.source_id = it->value("source_id", "");
    p.rule_id = it->value("rule_id", "");
    s.provenance = std::move(p);
  }
  if (detail::is_effectively_empty(s.text)) {
    throw DataError(where + ": empty text for id '" + s.id + "'");
  }
  return s;
}

namespace detail {

inline LabeledCorpus finish_corpus(std::string name, std::vector<Sample> samples,
                                   const std::vector<std::size_t>& lines) {
  std::unordered_map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto [it, fresh] = seen.emplace(samples[i].id, lines[i]);
    if (!fresh) {
      throw DataError("line " + std::to_string(lines[i]) + ": duplicate id '" +
                      samples[i].id + "' (first seen on line " +
                      std::to_string(it->second) + ")");
    }
  }
  return LabeledCorpus(std::move(name), std::move(samples));
}

}  // namespace detail

inline LabeledCorpus read_jsonl(std::istream& in, std::string name) {
  std::vector<Sample> samples;
  std::vector<std::size_t> lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (detail::is_blank(line)) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (!is_valid_utf8(line)) throw DataError(where + ": invalid UTF-8");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(where + ": malformed JSON (" + e.what() + ")");
    }
    samples.push_back(sample_from_json(j, where));
    lines.push_back(line_no);
  }
  return detail::finish_corpus(std::move(name), std::move(samples), lines);
}

inline void write_jsonl(const LabeledCorpus& c, std::ostream& out) {
  for (const auto& s : c) out << sample_to_json(s).dump() << '\n';
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180 quoting; header names the columns)

namespace detail {

// Reads one CSV record, which may span several physical lines when a quoted
// field contains newlines. Returns false at end of input.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields,
                            std::size_t& line_no) {
  fields.clear();
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  const std::size_t start_line = line_no;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;;) {
    if (!line.empty() && line.back() == '\r' && !quoted) line.pop_back();
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field.push_back('"');
            ++i;
          } else {
            quoted = false;
          }
        } else {
          field.push_back(c);
        }
      } else if (c == '"' && !field_started) {
        quoted = true;
        field_started = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
      } else {
        field.push_back(c);
        field_started = true;
      }
    }
    if (!quoted) break;
    if (!std::getline(in, line)) {
      throw DataError("line " + std::to_string(start_line) +
                      ": unterminated quoted field");
    }
    ++line_no;
    field.push_back('\n');
  }
  fields.push_back(std::move(field));
  return true;
}

inline std::string csv_escape(std::string_view s) {
  const bool needs = s.find_first_of(",\"\n\r") != std::string_view::npos;
  if (!needs) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace detail

inline LabeledCorpus read_csv(std::istream& in, std::string name) {
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  if (!detail::read_csv_record(in, fields, line_no)) {
    throw DataError("empty CSV input (expected header id,text,label[,split])");
  }
  std::unordered_map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string h = fields[i];
    if (i == 0 && h.rfind("\xEF\xBB\xBF", 0) == 0) h.erase(0, 3);
    col[h] = i;
  }
  for (const char* required : {"id", "text", "label"}) {
    if (!col.contains(required)) {
      throw DataError(std::string("CSV header lacks column '") + required + "'");
    }
  }
  const auto split_col = col.find("split");
  std::vector<Sample> samples;
  std::vector<std::size_t> lines;
  for (;;) {
    const std::size_t next_line = line_no + 1;
    if (!detail::read_csv_record(in, fields, line_no)) break;
    if (fields.size() == 1 && detail::is_blank(fields[0])) continue;
    const std::string where = "line " + std::to_string(next_line);
    if (fields.size() != col.size()) {
      throw DataError(where + ": expected " + std::to_string(col.size()) +
                      " fields, got " + std::to_string(fields.size()));
    }
    nlohmann::json j;
    j["id"] = fields[col["id"]];
    j["text"] = fields[col["text"]];
    j["label"] = fields[col["label"]];
    if (split_col != col.end() && !fields[split_col->second].empty()) {
      j["split"] = fields[split_col->second];
    }
    for (const char* key : {"id", "text", "label"}) {
      if (!is_valid_utf8(j[key].get_ref<const std::string&>())) {
        throw DataError(where + ": invalid UTF-8");
      }
    }
    samples.push_back(sample_from_json(j, where));
    lines.push_back(next_line);
  }
  return detail::finish_corpus(std::move(name), std::move(samples), lines);
}

inline void write_csv(const LabeledCorpus& c, std::ostream& out) {
  const bool any_split = std::any_of(c.begin(), c.end(),
                                     [](const Sample& s) { return s.split.has_value(); });
  out << (any_split ? "id,text,label,split\n" : "id,text,label\n");
  for (const auto& s : c) {
    out << detail::csv_escape(s.id) << ',' << detail::csv_escape(s.text) << ','
        << to_string(s.label);
    if (any_split) {
      out << ',';
      if (s.split) out << to_string(*s.split);
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Files

inline LabeledCorpus load_corpus(const std::filesystem::path& path,
                                 std::optional<CorpusFormat> format = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file " + path.string());
  const std::string name = path.stem().string();
  try {
    return format.value_or(format_from_path(path)) == CorpusFormat::Csv
               ? read_csv(in, name)
               : read_jsonl(in, name);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

inline void write_corpus(const LabeledCorpus& c, std::ostream& out,
                         CorpusFormat format) {
  if (format == CorpusFormat::Csv) write_csv(c, out);
  else write_jsonl(c, out);
}

inline void write_corpus(const LabeledCorpus& c, const std::filesystem::path& path,
                         std::optional<CorpusFormat> format = std::nullopt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write corpus file " + path.string());
  write_corpus(c, out, format.value_or(format_from_path(path)));
}

// ---------------------------------------------------------------------------
// Statistics

struct CorpusStats {
  std::string name;
  std::size_t n_true = 0;
  std::size_t n_false = 0;
  std::size_t n_total = 0;
  double false_pct = 0.0;  // fraction in [0,1]; rendered as a percentage
};

inline CorpusStats corpus_stats(const LabeledCorpus& c) {
  if (c.empty()) throw DataError("corpus '" + c.name() + "' is empty");
  CorpusStats st;
  st.name = c.name();
  for (const auto& s : c) {
    (s.label == Label::True ? st.n_true : st.n_false) += 1;
  }
  st.n_total = c.size();
  st.false_pct = static_cast<double>(st.n_false) / static_cast<double>(st.n_total);
  return st;
}

// ---------------------------------------------------------------------------
// Split

struct SplitConfig {
  double train_fraction = 0.7;
  std::uint64_t seed = 0;
};

struct SplitResult {
  LabeledCorpus train;
  LabeledCorpus test;
  // False when a label had too few samples to appear in both halves and the
  // split fell back to an unstratified shuffle.
  bool stratified = true;
};

inline std::size_t train_size_for(std::size_t n, double fraction) {
  // The epsilon absorbs products such as 0.57 * 100 = 56.999...
  auto k = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(n) + 1e-9));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

inline SplitResult split_corpus(const LabeledCorpus& c, const SplitConfig& cfg) {
  if (!(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0)) {
    throw DataError("train_fraction must lie strictly between 0 and 1");
  }
  if (c.size() < 2) {
    throw DataError("corpus '" + c.name() + "' needs at least 2 samples to split");
  }
  const std::size_t n = c.size();
  const std::size_t n_train = train_size_for(n, cfg.train_fraction);
  Rng rng(cfg.seed);

  std::vector<std::size_t> by_label[2];
  for (std::size_t i = 0; i < n; ++i) {
    by_label[c[i].label == Label::False].push_back(i);
  }

  // Largest-remainder allocation of train slots per label.
  std::size_t quota[2];
  double remainder[2];
  std::size_t assigned = 0;
  for (int l = 0; l < 2; ++l) {
    const double exact = static_cast<double>(n_train) *
                         static_cast<double>(by_label[l].size()) /
                         static_cast<double>(n);
    quota[l] = static_cast<std::size_t>(std::floor(exact));
    remainder[l] = exact - static_cast<double>(quota[l]);
    assigned += quota[l];
  }
  while (assigned < n_train) {
    const int l = remainder[1] > remainder[0] ? 1 : 0;
    const int pick = quota[l] < by_label[l].size() ? l : 1 - l;
    ++quota[pick];
    remainder[pick] = -1.0;
    ++assigned;
  }
  // Every label needs a representative in both halves.
  for (int l = 0; l < 2; ++l) {
    const std::size_t size = by_label[l].size();
    if (size >= 2 && quota[l] == 0 && quota[1 - l] > 1) {
      ++quota[l];
      --quota[1 - l];
    }
    if (size >= 2 && quota[l] == size && quota[1 - l] < by_label[1 - l].size()) {
      --quota[l];
      ++quota[1 - l];
    }
  }
  bool stratified = true;
  for (int l = 0; l < 2; ++l) {
    const std::size_t size = by_label[l].size();
    if (size < 2 || quota[l] == 0 || quota[l] == size) stratified = false;
  }

  std::vector<bool> in_train(n, false);
  if (stratified) {
    for (int l = 0; l < 2; ++l) {
      rng.shuffle(by_label[l]);
      for (std::size_t k = 0; k < quota[l]; ++k) in_train[by_label[l][k]] = true;
    }
  } else {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    rng.shuffle(all);
    for (std::size_t k = 0; k < n_train; ++k) in_train[all[k]] = true;
  }

  std::vector<Sample> train;
  std::vector<Sample> test;
  for (std::size_t i = 0; i < n; ++i) {
    Sample s = c[i];
    s.split = in_train[i] ? Split::Train : Split::Test;
    (in_train[i] ? train : test).push_back(std::move(s));
  }
  return SplitResult{LabeledCorpus(c.name() + "-train", std::move(train)),
                     LabeledCorpus(c.name() + "-test", std::move(test)),
                     stratified};
}

}  // namespace rumorbench
