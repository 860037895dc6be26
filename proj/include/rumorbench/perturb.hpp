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

// Rule-based text perturbations.
//
// Rewrite rules replace literal token sequences (matched case-insensitively
// on the shared tokenization) and may flip the gold label. A rule may carry
// several edits that must all match; they are applied together and count as
// one meaning reversal. Injection rules insert a cue phrase without touching
// the gold label.
//
// Rule file (JSONL):
//   {"rule_id","kind":"rewrite","match": str|[str],"replacement": str|[str],
//    "flips_label": bool}
//   {"rule_id","kind":"inject","cue_phrase": str,
//    "position":"append_before_terminal_punct"|"prepend"}

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/pairt.hpp"
#include "rumorbench/parallel.hpp"
#include "rumorbench/protocol.hpp"
#include "rumorbench/tokenize.hpp"

namespace rumorbench {

struct RewriteEdit {
  std::string match;              // surface form as written in the rule
  std::vector<std::string> match_tokens;
  std::string replacement;
};

struct RewriteRule {
  std::string rule_id;
  std::vector<RewriteEdit> edits;
  bool flips_label = true;
};

enum class InjectPosition : std::uint8_t { AppendBeforeTerminalPunct, Prepend };

struct InjectionRule {
  std::string rule_id;
  std::string cue_phrase;
  InjectPosition position = InjectPosition::AppendBeforeTerminalPunct;
};

struct RuleSet {
  std::vector<RewriteRule> rewrites;
  std::vector<InjectionRule> injections;

  const InjectionRule* find_injection(std::string_view id) const {
    for (const auto& r : injections) {
      if (r.rule_id == id) return &r;
    }
    return nullptr;
  }
};

inline RewriteEdit make_edit(std::string match, std::string replacement) {
  RewriteEdit e;
  e.match_tokens = tokenize(match);
  e.match = std::move(match);
  e.replacement = std::move(replacement);
  return e;
}

inline void validate(const RewriteRule& r) {
  if (r.rule_id.empty()) throw DataError("rewrite rule with empty rule_id");
  if (r.edits.empty()) throw DataError("rewrite rule '" + r.rule_id + "' has no edits");
  for (const auto& e : r.edits) {
    if (e.match_tokens.empty()) {
      throw DataError("rewrite rule '" + r.rule_id + "' has an empty match pattern");
    }
    if (tokenize(e.replacement) == e.match_tokens && e.replacement == e.match) {
      throw DataError("rewrite rule '" + r.rule_id + "' replaces '" + e.match +
                      "' with itself");
    }
  }
}

inline void validate(const InjectionRule& r) {
  if (r.rule_id.empty()) throw DataError("injection rule with empty rule_id");
  if (tokenize(r.cue_phrase).empty()) {
    throw DataError("injection rule '" + r.rule_id + "' has an empty cue_phrase");
  }
}

inline RewriteRule make_rewrite(std::string rule_id, std::string match,
                                std::string replacement, bool flips_label = true) {
  RewriteRule r{std::move(rule_id), {make_edit(std::move(match), std::move(replacement))},
                flips_label};
  validate(r);
  return r;
}

inline InjectionRule make_injection(std::string rule_id, std::string cue,
                                    InjectPosition pos = InjectPosition::AppendBeforeTerminalPunct) {
  InjectionRule r{std::move(rule_id), std::move(cue), pos};
  validate(r);
  return r;
}

inline RuleSet read_rules(std::istream& in) {
  RuleSet rs;
  std::unordered_map<std::string, std::size_t> seen;
  std::string line;
  std::size_t line_no = 0;
  const auto strings_of = [](const nlohmann::json& j, const std::string& where,
                             const char* key) {
    std::vector<std::string> out;
    if (j.is_string()) {
      out.push_back(j.get<std::string>());
    } else if (j.is_array() && !j.empty()) {
      for (const auto& x : j) {
        if (!x.is_string()) throw DataError(where + ": '" + key + "' entries must be strings");
        out.push_back(x.get<std::string>());
      }
    } else {
      throw DataError(where + ": '" + key + "' must be a string or non-empty array");
    }
    return out;
  };
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
    if (!j.is_object() || !j.contains("rule_id") || !j["rule_id"].is_string()) {
      throw DataError(where + ": missing string 'rule_id'");
    }
    const auto id = j["rule_id"].get<std::string>();
    if (!seen.emplace(id, line_no).second) {
      throw DataError(where + ": duplicate rule_id '" + id + "'");
    }
    const auto kind = j.value("kind", std::string("rewrite"));
    try {
      if (kind == "rewrite") {
        if (!j.contains("match") || !j.contains("replacement")) {
          throw DataError(where + ": rewrite rule needs 'match' and 'replacement'");
        }
        const auto matches = strings_of(j["match"], where, "match");
        const auto repls = strings_of(j["replacement"], where, "replacement");
        if (matches.size() != repls.size()) {
          throw DataError(where + ": 'match' and 'replacement' lengths differ");
        }
        RewriteRule r;
        r.rule_id = id;
        r.flips_label = j.value("flips_label", true);
        for (std::size_t k = 0; k < matches.size(); ++k) {
          r.edits.push_back(make_edit(matches[k], repls[k]));
        }
        validate(r);
        rs.rewrites.push_back(std::move(r));
      } else if (kind == "inject") {
        if (!j.contains("cue_phrase") || !j["cue_phrase"].is_string()) {
          throw DataError(where + ": injection rule needs string 'cue_phrase'");
        }
        InjectionRule r;
        r.rule_id = id;
        r.cue_phrase = j["cue_phrase"].get<std::string>();
        const auto pos = j.value("position", std::string("append_before_terminal_punct"));
        if (pos == "append_before_terminal_punct") {
          r.position = InjectPosition::AppendBeforeTerminalPunct;
        } else if (pos == "prepend") {
          r.position = InjectPosition::Prepend;
        } else {
          throw DataError(where + ": unknown position '" + pos + "'");
        }
        validate(r);
        rs.injections.push_back(std::move(r));
      } else {
        throw DataError(where + ": unknown rule kind '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return rs;
}

inline RuleSet load_rules(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open rule file " + path.string());
  try {
    return read_rules(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rewriting

namespace detail {

struct Span {
  std::size_t begin;
  std::size_t end;
};

// Byte span of the first occurrence of `pattern` in `tokens`.
inline std::optional<Span> find_tokens(const std::vector<Token>& tokens,
                                       const std::vector<std::string>& pattern) {
  if (pattern.empty() || pattern.size() > tokens.size()) return std::nullopt;
  for (std::size_t i = 0; i + pattern.size() <= tokens.size(); ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < pattern.size() && ok; ++k) {
      ok = tokens[i + k].text == pattern[k];
    }
    if (ok) return Span{tokens[i].begin, tokens[i + pattern.size() - 1].end};
  }
  return std::nullopt;
}

}  // namespace detail

// Applies `rule` to `text` if every edit matches (first occurrence each,
// non-overlapping). Returns the rewritten text, or nullopt on no match.
inline std::optional<std::string> rewrite_text(std::string_view text, const RewriteRule& rule) {
  const auto tokens = tokenize_with_offsets(text);
  std::vector<std::pair<detail::Span, const RewriteEdit*>> hits;
  for (const auto& e : rule.edits) {
    auto span = detail::find_tokens(tokens, e.match_tokens);
    if (!span) return std::nullopt;
    hits.emplace_back(*span, &e);
  }
  std::sort(hits.begin(), hits.end(),
            [](const auto& x, const auto& y) { return x.first.begin < y.first.begin; });
  for (std::size_t k = 1; k < hits.size(); ++k) {
    if (hits[k].first.begin < hits[k - 1].first.end) return std::nullopt;
  }
  std::string out(text);
  for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
    out.replace(it->first.begin, it->first.end - it->first.begin, it->second->replacement);
  }
  return out;
}

struct RewriteResult {
  LabeledCorpus adversarial;      // same size and order as the input
  std::vector<PairedCase> pairs;  // one per label-flipping rewrite
  std::size_t n_rewritten = 0;
  std::vector<std::string> rewritten_ids;  // original ids that were rewritten
};

inline std::string derived_id(const std::string& id, const std::string& rule_id) {
  return id + "~" + rule_id;
}

// Each sample is rewritten by the first rule (in rule order) that matches;
// unmatched samples pass through unchanged.
inline RewriteResult apply_rewrites(const LabeledCorpus& corpus,
                                    std::span<const RewriteRule> rules) {
  for (const auto& r : rules) validate(r);
  RewriteResult res;
  std::vector<Sample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    const RewriteRule* used = nullptr;
    std::optional<std::string> text;
    for (const auto& r : rules) {
      text = rewrite_text(s.text, r);
      if (text) {
        used = &r;
        break;
      }
    }
    if (!used) {
      out.push_back(s);
      continue;
    }
    if (detail::is_effectively_empty(*text)) {
      throw DataError("rule '" + used->rule_id + "' leaves sample '" + s.id + "' empty");
    }
    Sample t;
    t.id = derived_id(s.id, used->rule_id);
    t.text = std::move(*text);
    t.label = used->flips_label ? opposite(s.label) : s.label;
    t.split = s.split;
    t.provenance = Provenance{s.id, used->rule_id};
    if (used->flips_label) {
      Sample orig = s;
      orig.provenance.reset();
      res.pairs.push_back(PairedCase{t.id, std::move(orig), t});
      res.pairs.back().b.provenance.reset();
    }
    res.rewritten_ids.push_back(s.id);
    ++res.n_rewritten;
    out.push_back(std::move(t));
  }
  res.adversarial = LabeledCorpus(corpus.name() + "-adversarial", std::move(out));
  return res;
}

// ---------------------------------------------------------------------------
// Injection

namespace detail {

inline bool is_terminal_punct(char32_t c) {
  switch (c) {
    case '.': case '!': case '?': case ';': case ':': case '"': case '\'':
    case ')': case ']': case 0x2026: case 0x201D: case 0x2019: case 0x00BB:
    case 0x300D: case 0x3002: case 0xFF01: case 0xFF1F:
      return true;
    default:
      return false;
  }
}

// Byte offset where the trailing run of terminal punctuation (and trailing
// whitespace) begins.
inline std::size_t terminal_run_start(std::string_view text) {
  std::vector<std::pair<std::size_t, char32_t>> cps;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto d = decode_utf8(text, pos);
    if (!d) throw DataError("invalid UTF-8");
    cps.emplace_back(pos, d->cp);
    pos += d->length;
  }
  std::size_t k = cps.size();
  while (k > 0 && is_space(cps[k - 1].second)) --k;
  while (k > 0 && is_terminal_punct(cps[k - 1].second)) --k;
  return k == cps.size() ? text.size() : cps[k].first;
}

}  // namespace detail

inline std::string inject_text(std::string_view text, const InjectionRule& rule) {
  if (rule.position == InjectPosition::Prepend) {
    return rule.cue_phrase + " " + std::string(text);
  }
  const std::size_t cut = detail::terminal_run_start(text);
  std::string head(text.substr(0, cut));
  while (!head.empty() && (head.back() == ' ' || head.back() == '\t')) head.pop_back();
  return head + " " + rule.cue_phrase + std::string(text.substr(cut));
}

inline LabeledCorpus apply_injection(const LabeledCorpus& corpus, const InjectionRule& rule) {
  validate(rule);
  std::vector<Sample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) {
    Sample t;
    t.id = derived_id(s.id, rule.rule_id);
    t.text = inject_text(s.text, rule);
    t.label = s.label;
    t.split = s.split;
    t.provenance = Provenance{s.id, rule.rule_id};
    out.push_back(std::move(t));
  }
  return LabeledCorpus(corpus.name() + "-injected", std::move(out));
}

// ---------------------------------------------------------------------------
// Evaluation over aligned corpora

namespace detail {

// For every sample of `derived`, the index of its source in `original`
// (provenance.source_id, else identical id). Must be a bijection.
inline std::vector<std::size_t> align(const LabeledCorpus& original,
                                      const LabeledCorpus& derived) {
  if (original.size() != derived.size()) {
    throw DataError("corpora are misaligned: " + std::to_string(original.size()) + " vs " +
                    std::to_string(derived.size()) + " samples");
  }
  std::unordered_map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < original.size(); ++i) pos.emplace(original[i].id, i);
  std::vector<std::size_t> map(derived.size());
  std::vector<bool> used(original.size(), false);
  for (std::size_t k = 0; k < derived.size(); ++k) {
    const auto& d = derived[k];
    const std::string& src = d.provenance ? d.provenance->source_id : d.id;
    auto it = pos.find(src);
    if (it == pos.end()) {
      throw DataError("corpora are misaligned: '" + d.id + "' has no source '" + src + "'");
    }
    if (used[it->second]) {
      throw DataError("corpora are misaligned: source '" + src + "' used twice");
    }
    used[it->second] = true;
    map[k] = it->second;
  }
  return map;
}

}  // namespace detail

struct AdversarialSummary {
  std::size_t n = 0;
  double acc_original = 0.0;
  double acc_adversarial = 0.0;
  double drop_points = 0.0;  // percentage points
};

inline double accuracy_of(std::span<const Prediction> preds, const LabeledCorpus& gold) {
  std::size_t ok = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) ok += preds[i].label == gold[i].label;
  return static_cast<double>(ok) / static_cast<double>(gold.size());
}

inline AdversarialSummary adversarial_eval(const ModelHandle& model,
                                           const LabeledCorpus& original,
                                           const LabeledCorpus& adversarial,
                                           std::size_t jobs = 1) {
  if (original.empty()) throw DataError("adversarial evaluation over an empty corpus");
  detail::align(original, adversarial);
  AdversarialSummary s;
  s.n = original.size();
  s.acc_original = accuracy_of(predict_pooled(model, original.samples(), jobs), original);
  s.acc_adversarial =
      accuracy_of(predict_pooled(model, adversarial.samples(), jobs), adversarial);
  s.drop_points = 100.0 * (s.acc_original - s.acc_adversarial);
  return s;
}

struct ConsistencySummary {
  std::size_t n = 0;
  std::size_t n_flipped = 0;
  double flip_rate = 0.0;
};

inline ConsistencySummary consistency_eval(const ModelHandle& model,
                                           const LabeledCorpus& original,
                                           const LabeledCorpus& injected,
                                           std::size_t jobs = 1) {
  if (original.empty()) throw DataError("consistency evaluation over an empty corpus");
  const auto map = detail::align(original, injected);
  const auto before = predict_pooled(model, original.samples(), jobs);
  const auto after = predict_pooled(model, injected.samples(), jobs);
  ConsistencySummary s;
  s.n = injected.size();
  for (std::size_t k = 0; k < injected.size(); ++k) {
    s.n_flipped += after[k].label != before[map[k]].label;
  }
  s.flip_rate = static_cast<double>(s.n_flipped) / static_cast<double>(s.n);
  return s;
}

}  // namespace rumorbench
