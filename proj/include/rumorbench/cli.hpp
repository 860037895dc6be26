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

// Command-line driver. run_cli() holds all logic so tests can call it
// in-process; tools/rumorbench.cpp is a thin main().
//
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "rumorbench/adapters.hpp"
#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/cuescan.hpp"
#include "rumorbench/metrics.hpp"
#include "rumorbench/pairt.hpp"
#include "rumorbench/parallel.hpp"
#include "rumorbench/perturb.hpp"
#include "rumorbench/refmodel.hpp"
#include "rumorbench/report.hpp"
#include "rumorbench/synth.hpp"

namespace rumorbench::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string format = "json";
  std::string out;
  std::size_t jobs = 0;  // 0 = default_jobs()
  double timeout_secs = 30.0;
  std::uint64_t seed = 0;

  std::vector<std::string> inputs;  // positional
  std::vector<std::string> models;
  std::vector<std::string> corpora;
  std::string pairs;
  std::string rules;

  // split
  double train_frac = 0.7;
  std::string out_dir;
  // train-ref
  std::string model_out;
  int epochs = TrainConfig{}.epochs;
  double learning_rate = TrainConfig{}.learning_rate;
  double l2 = TrainConfig{}.l2;
  std::size_t batch_size = TrainConfig{}.batch_size;
  // cues
  double s_min = CueScanConfig{}.s_min;
  double b_min = CueScanConfig{}.b_min;
  std::size_t min_token_length = CueScanConfig{}.min_token_length;
  // perturb
  std::string adv_out;
  std::string pairs_out;
  std::string inject;
  std::string inject_label;
  // synth
  SynthConfig synth;
  std::string corpus_out;
};

namespace detail {

inline std::shared_ptr<spdlog::logger> logger() {
  static std::shared_ptr<spdlog::logger> log = [] {
    auto l = std::make_shared<spdlog::logger>(
        "rumorbench", std::make_shared<spdlog::sinks::stderr_sink_mt>());
    l->set_pattern("[%l] %v");
    return l;
  }();
  return log;
}

inline void configure_logging() {
  const char* env = std::getenv("RB_LOG");
  auto level = spdlog::level::warn;
  if (env != nullptr && *env != '\0') level = spdlog::level::from_str(env);
  logger()->set_level(level);
}

struct NamedSpec {
  std::optional<std::string> name;
  std::string spec;
};

// "NAME=SPEC" or a bare SPEC. The name may not contain ':'.
inline NamedSpec split_named_spec(const std::string& s) {
  const auto eq = s.find('=');
  const auto colon = s.find(':');
  if (eq != std::string::npos && eq > 0 && (colon == std::string::npos || eq < colon)) {
    return {s.substr(0, eq), s.substr(eq + 1)};
  }
  return {std::nullopt, s};
}

struct OpenModel {
  std::string name;
  std::string spec;
  std::unique_ptr<ModelHandle> handle;
};

inline std::vector<OpenModel> open_models(const std::vector<std::string>& specs,
                                          double timeout_secs) {
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_secs * 1000.0));
  std::vector<OpenModel> out;
  std::unordered_set<std::string> names;
  for (const auto& raw : specs) {
    auto ns = split_named_spec(raw);
    parse_model_spec(ns.spec);  // validates the prefix before connecting
    logger()->info("connecting to {}", ns.spec);
    auto h = std::make_unique<ModelHandle>(open_model(ns.spec, timeout));
    OpenModel m{ns.name.value_or(h->name()), ns.spec, std::move(h)};
    if (!names.insert(m.name).second) {
      throw UsageError("duplicate model name '" + m.name + "'; use NAME=SPEC to disambiguate");
    }
    out.push_back(std::move(m));
  }
  return out;
}

inline std::vector<LabeledCorpus> load_all(const std::vector<std::string>& paths) {
  std::vector<LabeledCorpus> out;
  std::unordered_set<std::string> names;
  for (const auto& p : paths) {
    out.push_back(load_corpus(p));
    if (!names.insert(out.back().name()).second) {
      throw UsageError("two corpora share the name '" + out.back().name() + "'");
    }
  }
  return out;
}

inline std::filesystem::path sibling(const std::filesystem::path& dir,
                                     const std::filesystem::path& like,
                                     const std::string& suffix) {
  return dir / (like.stem().string() + suffix + like.extension().string());
}

inline std::filesystem::path manifest_path(const std::filesystem::path& corpus_out) {
  auto p = corpus_out;
  p.replace_extension(".manifest.json");
  return p;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace detail

// Configuration echo: everything that influences the result.
inline ojson config_echo(const std::string& sub, const Options& o) {
  ojson j = {{"subcommand", sub},
             {"tool_version", kToolVersion},
             {"tokenizer_version", kTokenizerVersion},
             {"format", o.format}};
  if (!o.inputs.empty()) j["inputs"] = o.inputs;
  if (!o.models.empty()) j["models"] = o.models;
  if (!o.corpora.empty()) j["corpora"] = o.corpora;
  if (!o.pairs.empty()) j["pairs"] = o.pairs;
  if (!o.rules.empty()) j["rules"] = o.rules;
  if (sub == "split") {
    j["train_frac"] = o.train_frac;
    j["seed"] = o.seed;
  } else if (sub == "train-ref") {
    j["model_out"] = o.model_out;
    j["train"] = {{"epochs", o.epochs},
                  {"learning_rate", o.learning_rate},
                  {"l2", o.l2},
                  {"batch_size", o.batch_size},
                  {"seed", o.seed}};
  } else if (sub == "cues") {
    j["s_min"] = o.s_min;
    j["b_min"] = o.b_min;
    j["min_token_length"] = o.min_token_length;
  } else if (sub == "perturb") {
    if (!o.inject.empty()) j["inject"] = o.inject;
    if (!o.inject_label.empty()) j["inject_label"] = o.inject_label;
  } else if (sub == "synth") {
    j["synth"] = synth_manifest(o.synth)["config"];
  }
  if (!o.models.empty()) j["timeout_secs"] = o.timeout_secs;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands. Each fills `doc` and returns an exit code.

inline int cmd_stats(const Options& o, ReportDocument& doc) {
  std::vector<CorpusStats> stats;
  for (const auto& c : detail::load_all(o.inputs)) stats.push_back(corpus_stats(c));
  doc.sections.push_back(stats_section(stats));
  return kExitOk;
}

inline int cmd_split(const Options& o, ReportDocument& doc) {
  const std::filesystem::path in(o.inputs.at(0));
  const auto corpus = load_corpus(in);
  const auto r = split_corpus(corpus, SplitConfig{o.train_frac, o.seed});
  const std::filesystem::path dir =
      o.out_dir.empty() ? in.parent_path() : std::filesystem::path(o.out_dir);
  const auto train_path = detail::sibling(dir, in, "-train");
  const auto test_path = detail::sibling(dir, in, "-test");
  write_corpus(r.train, train_path);
  write_corpus(r.test, test_path);
  const std::vector<CorpusStats> stats = {corpus_stats(r.train), corpus_stats(r.test)};
  doc.sections.push_back(stats_section(stats));
  doc.sections.push_back(summary_section(
      "Split", {{"train_path", train_path.string()},
                {"test_path", test_path.string()},
                {"n_train", r.train.size()},
                {"n_test", r.test.size()},
                {"stratified", r.stratified}}));
  return kExitOk;
}

inline int cmd_train(const Options& o, ReportDocument& doc) {
  const auto corpus = load_corpus(o.corpora.at(0));
  TrainConfig cfg{o.epochs, o.learning_rate, o.seed, o.l2, o.batch_size};
  detail::logger()->info("training on {} samples", corpus.size());
  auto r = train(corpus, cfg);
  r.model.save(o.model_out);
  doc.sections.push_back(summary_section(
      "Reference model", {{"model_path", o.model_out},
                          {"corpus", corpus.name()},
                          {"n_samples", corpus.size()},
                          {"vocab_size", r.model.vocab().size()},
                          {"train_accuracy", r.train_accuracy},
                          {"final_loss", r.final_loss}}));
  return kExitOk;
}

inline int cmd_eval(const Options& o, ReportDocument& doc, std::size_t jobs) {
  const auto corpora = detail::load_all(o.corpora);
  const auto models = detail::open_models(o.models, o.timeout_secs);
  std::vector<NamedMetrics> rows;
  for (const auto& m : models) {
    for (const auto& c : corpora) rows.push_back({m.name, c.name(), evaluate(*m.handle, c, jobs)});
  }
  doc.sections.push_back(metrics_section(rows));
  return kExitOk;
}

inline int cmd_cross_eval(const Options& o, ReportDocument& doc, std::size_t jobs) {
  const auto corpora = detail::load_all(o.corpora);
  const auto models = detail::open_models(o.models, o.timeout_secs);
  std::vector<const ModelHandle*> handles;
  std::vector<std::string> names;
  for (const auto& m : models) {
    handles.push_back(m.handle.get());
    names.push_back(m.name);
  }
  const auto matrix = cross_eval(handles, corpora, jobs, names);
  doc.sections.push_back(eval_matrix_section(matrix));
  const bool all_failed = std::all_of(matrix.row_errors.begin(), matrix.row_errors.end(),
                                      [](const auto& e) { return e.has_value(); });
  for (std::size_t i = 0; i < matrix.row_errors.size(); ++i) {
    if (matrix.row_errors[i]) {
      detail::logger()->error("model '{}': {}", matrix.trained_on[i], *matrix.row_errors[i]);
    }
  }
  return all_failed ? kExitRuntime : kExitOk;
}

inline int cmd_pairt(const Options& o, ReportDocument& doc, std::size_t jobs) {
  const auto pairs = load_pairs(o.pairs);
  const auto models = detail::open_models(o.models, o.timeout_secs);
  std::vector<NamedPairT> results;
  for (const auto& m : models) results.push_back({m.name, evaluate_pairt(*m.handle, pairs, jobs)});
  doc.sections.push_back(pairt_section(pairs, results));
  return kExitOk;
}

inline int cmd_cues(const Options& o, ReportDocument& doc, std::size_t jobs) {
  const auto corpus = load_corpus(o.corpora.at(0));
  const auto models = detail::open_models(o.models, o.timeout_secs);
  CueScanConfig cfg{o.s_min, o.b_min, o.min_token_length};
  validate(cfg);
  const auto& m = models.at(0);
  const auto r = scan_detailed(*m.handle, corpus, cfg, jobs);
  doc.sections.push_back(cues_section(r, cfg, m.name));
  return kExitOk;
}

inline int cmd_perturb(const Options& o, ReportDocument& doc, std::size_t jobs) {
  const auto corpus = load_corpus(o.corpora.at(0));
  const auto rules = load_rules(o.rules);
  const InjectionRule* inject = nullptr;
  if (!o.inject.empty()) {
    inject = rules.find_injection(o.inject);
    if (inject == nullptr) {
      throw UsageError("--inject names unknown injection rule '" + o.inject + "'");
    }
  }
  std::optional<Label> inject_label;
  if (!o.inject_label.empty()) {
    inject_label = parse_label(o.inject_label);
    if (!inject_label) throw UsageError("unknown --inject-label '" + o.inject_label + "'");
  }
  const auto rw = apply_rewrites(corpus, rules.rewrites);
  if (!o.adv_out.empty()) write_corpus(rw.adversarial, o.adv_out);
  if (!o.pairs_out.empty()) {
    std::ostringstream s;
    write_pairs(rw.pairs, s);
    detail::write_text(o.pairs_out, s.str());
  }
  doc.sections.push_back(summary_section(
      "Rewrites", {{"corpus", corpus.name()},
                   {"n_samples", corpus.size()},
                   {"n_rules", rules.rewrites.size()},
                   {"n_rewritten", rw.n_rewritten},
                   {"n_label_flips", rw.pairs.size()}}));
  if (o.models.empty()) return kExitOk;

  const auto models = detail::open_models(o.models, o.timeout_secs);
  // Rewritten rows only, aligned with their originals.
  std::vector<Sample> orig_sub;
  std::vector<Sample> adv_sub;
  {
    std::unordered_set<std::string> touched(rw.rewritten_ids.begin(), rw.rewritten_ids.end());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      if (touched.contains(corpus[i].id)) {
        orig_sub.push_back(corpus[i]);
        adv_sub.push_back(rw.adversarial[i]);
      }
    }
  }
  std::optional<LabeledCorpus> orig_rw;
  std::optional<LabeledCorpus> adv_rw;
  if (!orig_sub.empty()) {
    orig_rw.emplace(corpus.name() + "-rewritten", std::move(orig_sub));
    adv_rw.emplace(corpus.name() + "-rewritten-adversarial", std::move(adv_sub));
  }
  std::vector<NamedAdversarial> adv_rows;
  for (const auto& m : models) {
    adv_rows.push_back({m.name, corpus.name(),
                        adversarial_eval(*m.handle, corpus, rw.adversarial, jobs)});
    if (orig_rw) {
      adv_rows.push_back({m.name, orig_rw->name(),
                          adversarial_eval(*m.handle, *orig_rw, *adv_rw, jobs)});
    }
  }
  doc.sections.push_back(adversarial_section(adv_rows));

  if (inject != nullptr) {
    const auto cue_tokens = tokenize(inject->cue_phrase);
    std::vector<Sample> pool;
    for (const auto& s : corpus) {
      if (inject_label && s.label != *inject_label) continue;
      const auto toks = tokenize(s.text);
      const bool has_cue = std::search(toks.begin(), toks.end(), cue_tokens.begin(),
                                       cue_tokens.end()) != toks.end();
      if (!has_cue) pool.push_back(s);
    }
    if (pool.empty()) throw DataError("no samples eligible for injection");
    const LabeledCorpus base(corpus.name() + "-probe", std::move(pool));
    const auto injected = apply_injection(base, *inject);
    std::vector<NamedConsistency> rows;
    for (const auto& m : models) {
      rows.push_back({m.name, inject->rule_id, consistency_eval(*m.handle, base, injected, jobs)});
    }
    doc.sections.push_back(consistency_section(rows));
  }
  return kExitOk;
}

inline int cmd_synth(const Options& o, ReportDocument& doc) {
  const auto corpus = generate(o.synth);
  const std::filesystem::path out(o.corpus_out);
  write_corpus(corpus, out);
  const auto manifest = synth_manifest(o.synth);
  detail::write_text(detail::manifest_path(out), manifest.dump(2) + "\n");
  doc.sections.push_back(stats_section(std::vector<CorpusStats>{corpus_stats(corpus)}));
  auto fields = manifest["planted"];
  fields["corpus_path"] = out.string();
  fields["manifest_path"] = detail::manifest_path(out).string();
  doc.sections.push_back(summary_section("Synthetic corpus", fields));
  return kExitOk;
}

inline int cmd_report(const Options& o, ReportDocument& doc) {
  std::ifstream in(o.inputs.at(0), std::ios::binary);
  if (!in) throw DataError("cannot open report " + o.inputs.at(0));
  std::stringstream ss;
  ss << in.rdbuf();
  doc = parse_report(ss.str());
  return kExitOk;
}

// ---------------------------------------------------------------------------

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  detail::configure_logging();
  CLI::App app{"Evaluation harness for rumor detection models", "rumorbench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Output format")
        ->check(CLI::IsMember({"json", "markdown", "md", "csv"}));
    sub->add_option("--out", o.out, "Write the report here instead of stdout");
  };
  const auto model_flags = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--model", o.models, "Model specifier [NAME=]ref:|cmd:|http:");
    if (required) opt->required();
    sub->add_option("--jobs", o.jobs, "Worker pool size")->check(CLI::PositiveNumber);
    sub->add_option("--timeout-secs", o.timeout_secs, "Per-request adapter timeout")
        ->check(CLI::PositiveNumber);
    return opt;
  };

  auto* stats = app.add_subcommand("stats", "Corpus label statistics");
  stats->add_option("corpus", o.inputs, "Corpus files")->required()->check(CLI::ExistingFile);
  common(stats);

  auto* split = app.add_subcommand("split", "Stratified train/test split");
  split->add_option("corpus", o.inputs, "Corpus file")->required()->expected(1)
      ->check(CLI::ExistingFile);
  split->add_option("--train-frac", o.train_frac, "Training fraction")
      ->check(CLI::Range(0.0, 1.0));
  split->add_option("--seed", o.seed, "Random seed");
  split->add_option("--out-dir", o.out_dir, "Directory for the two halves");
  common(split);

  auto* tr = app.add_subcommand("train-ref", "Train the reference model");
  tr->add_option("--corpus", o.corpora, "Training corpus")->required()->expected(1)
      ->check(CLI::ExistingFile);
  tr->add_option("--model-out", o.model_out, "Where to save the model")->required();
  tr->add_option("--epochs", o.epochs)->check(CLI::PositiveNumber);
  tr->add_option("--learning-rate", o.learning_rate)->check(CLI::PositiveNumber);
  tr->add_option("--l2", o.l2)->check(CLI::NonNegativeNumber);
  tr->add_option("--batch-size", o.batch_size)->check(CLI::PositiveNumber);
  tr->add_option("--seed", o.seed, "Random seed");
  common(tr);

  auto* ev = app.add_subcommand("eval", "Accuracy, precision, recall and F1");
  model_flags(ev, true);
  ev->add_option("--corpus", o.corpora, "Test corpora")->required()->check(CLI::ExistingFile);
  common(ev);

  auto* ce = app.add_subcommand("cross-eval", "Trained-on x evaluated-on F1 matrix");
  model_flags(ce, true);
  ce->add_option("--corpus", o.corpora, "Test corpora")->required()->check(CLI::ExistingFile);
  common(ce);

  auto* pt = app.add_subcommand("pairt", "Paired test");
  model_flags(pt, true);
  pt->add_option("--pairs", o.pairs, "Pair file")->required()->check(CLI::ExistingFile);
  common(pt);

  auto* cu = app.add_subcommand("cues", "Spurious cue scan");
  model_flags(cu, true)->expected(1);
  cu->add_option("--corpus", o.corpora, "Corpus")->required()->expected(1)
      ->check(CLI::ExistingFile);
  cu->add_option("--s-min", o.s_min, "Strength threshold");
  cu->add_option("--b-min", o.b_min, "Breadth threshold");
  cu->add_option("--min-token-length", o.min_token_length, "Ignore shorter words");
  common(cu);

  auto* pe = app.add_subcommand("perturb", "Adversarial rewrites and cue injection");
  auto* pe_model = model_flags(pe, false);
  pe->add_option("--corpus", o.corpora, "Corpus")->required()->expected(1)
      ->check(CLI::ExistingFile);
  pe->add_option("--rules", o.rules, "Rule file")->required()->check(CLI::ExistingFile);
  pe->add_option("--adv-out", o.adv_out, "Write the adversarial corpus here");
  pe->add_option("--pairs-out", o.pairs_out, "Write label-flipping pairs here");
  auto* inj = pe->add_option("--inject", o.inject, "Injection rule_id for a flip probe");
  inj->needs(pe_model);
  pe->add_option("--inject-label", o.inject_label, "Only inject into samples with this label")
      ->needs(inj);
  common(pe);

  auto* sy = app.add_subcommand("synth", "Generate a corpus with a planted cue");
  sy->add_option("--n", o.synth.n)->check(CLI::PositiveNumber);
  sy->add_option("--cue-word", o.synth.cue_word);
  sy->add_option("--cue-breadth", o.synth.cue_breadth);
  sy->add_option("--cue-false-share", o.synth.cue_false_share);
  sy->add_option("--base-vocab", o.synth.base_vocab_size);
  sy->add_option("--min-tokens", o.synth.min_tokens);
  sy->add_option("--max-tokens", o.synth.max_tokens);
  sy->add_option("--label-signal", o.synth.label_signal);
  sy->add_option("--seed", o.synth.seed, "Random seed");
  sy->add_option("--corpus-out", o.corpus_out, "Where to write the corpus")->required();
  common(sy);

  auto* rp = app.add_subcommand("report", "Re-render a saved JSON report");
  rp->add_option("report", o.inputs, "Report JSON")->required()->expected(1)
      ->check(CLI::ExistingFile);
  common(rp);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  if (sub == "synth") o.seed = o.synth.seed;
  const std::size_t jobs = o.jobs == 0 ? default_jobs() : o.jobs;
  ReportDocument doc;
  doc.title = "rumorbench " + sub;
  int code = kExitOk;
  try {
    const auto format = parse_report_format(o.format);
    doc.config_echo = config_echo(sub, o);
    doc.generated_at = reproducible_timestamp();
    if (sub == "stats") code = cmd_stats(o, doc);
    else if (sub == "split") code = cmd_split(o, doc);
    else if (sub == "train-ref") code = cmd_train(o, doc);
    else if (sub == "eval") code = cmd_eval(o, doc, jobs);
    else if (sub == "cross-eval") code = cmd_cross_eval(o, doc, jobs);
    else if (sub == "pairt") code = cmd_pairt(o, doc, jobs);
    else if (sub == "cues") code = cmd_cues(o, doc, jobs);
    else if (sub == "perturb") code = cmd_perturb(o, doc, jobs);
    else if (sub == "synth") code = cmd_synth(o, doc);
    else if (sub == "report") code = cmd_report(o, doc);

    const auto text = render(doc, format);
    if (o.out.empty()) {
      out << text;
    } else {
      detail::write_text(o.out, text);
    }
    return code;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CapabilityError& e) {
    err << "capability error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

inline int main(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace rumorbench::cli
