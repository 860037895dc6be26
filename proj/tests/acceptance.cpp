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

// Acceptance battery. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Every tolerance and time limit is fixed below.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "rumorbench/cuescan.hpp"
#include "rumorbench/metrics.hpp"
#include "rumorbench/pairt.hpp"
#include "rumorbench/perturb.hpp"
#include "rumorbench/refmodel.hpp"
#include "rumorbench/report.hpp"
#include "rumorbench/synth.hpp"
#include "support.hpp"

namespace {

using namespace rumorbench;
using rbtest::sample;

// Tolerances.
constexpr double kMetricTol = 1e-12;
constexpr double kGradStep = 1e-5;
constexpr double kGradRelTol = 1e-4;
constexpr double kMinTestAccuracy = 0.85;
constexpr double kMinDropPoints = 10.0;
constexpr double kMinCueFlipRate = 0.5;
constexpr double kMaxFreshFlipRate = 0.05;

// Shortcut reproduction setup.
constexpr std::uint64_t kSeed = 7;
constexpr std::size_t kSynthN = 2000;
constexpr double kCueBreadth = 0.08;
constexpr double kCueFalseShare = 0.95;
constexpr double kLabelSignal = 0.4;
constexpr double kTrainFraction = 0.7;
constexpr int kEpochs = 8;
constexpr std::size_t kProbeSize = 100;
constexpr const char* kFreshToken = "zqxfresh";

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome worked_example_arithmetic() {
  std::vector<PairedCase> pairs;
  for (int i = 0; i < 4; ++i) {
    const auto k = std::to_string(i);
    pairs.push_back({k, sample(k + "a", "x", Label::False), sample(k + "b", "y", Label::True)});
  }
  // #1 #2 | #3 #4 | #5 #6 | #7 #8; wrong: #3, #6, #7.
  const std::vector<std::optional<Label>> a = {Label::False, Label::True, Label::False,
                                               Label::True};
  const std::vector<std::optional<Label>> b = {Label::True, Label::True, Label::False,
                                               Label::True};
  const auto r = score_pairs(pairs, a, b);
  const bool ok = r.n_samples_correct == 5 && r.n_pairs_correct == 1 &&
                  r.standard_accuracy == 0.625 && r.pairt_accuracy == 0.25;
  return {ok, "standard " + pct(r.standard_accuracy) + "%, PairT " +
                  pct(r.pairt_accuracy) + "%"};
}

Outcome pairt_dominance() {
  Rng rng(1001);
  for (int round = 0; round < 10000; ++round) {
    const auto n = 1 + rng.below(6);
    std::vector<PairedCase> pairs;
    std::vector<std::optional<Label>> a, b;
    for (std::size_t i = 0; i < n; ++i) {
      const auto k = std::to_string(i);
      const Label la = rbtest::random_label(rng);
      pairs.push_back({k, sample(k + "a", "x", la), sample(k + "b", "y", opposite(la))});
      a.push_back(rbtest::random_label(rng));
      b.push_back(rbtest::random_label(rng));
    }
    const auto r = score_pairs(pairs, a, b);
    if (r.pairt_accuracy > r.standard_accuracy) {
      return {false, "round " + std::to_string(round) + " violates dominance"};
    }
    for (Label c : {Label::True, Label::False}) {
      const std::vector<std::optional<Label>> same(n, c);
      if (score_pairs(pairs, same, same).pairt_accuracy != 0.0) {
        return {false, "constant classifier scored nonzero PairT"};
      }
    }
  }
  return {true, "10000 outcome sets"};
}

Outcome metric_oracle() {
  Rng rng(1002);
  double worst = 0.0;
  for (int round = 0; round < 1000; ++round) {
    const auto n = 1 + rng.below(50);
    std::vector<Sample> gold;
    std::vector<Label> gl, pl;
    std::vector<Prediction> preds;
    for (std::size_t i = 0; i < n; ++i) {
      gl.push_back(rbtest::random_label(rng));
      pl.push_back(rbtest::random_label(rng));
      gold.push_back(sample("s" + std::to_string(i), "x", gl.back()));
      preds.push_back(make_prediction(gold.back().id, pl.back() == Label::False ? 0.75 : 0.25));
    }
    const auto m = bundle(confusion(preds, gold));
    const auto o = rbtest::brute_force_metrics(gl, pl);
    for (double d : {m.accuracy - o.accuracy, m.precision - o.precision, m.recall - o.recall,
                     m.f1 - o.f1}) {
      worst = std::max(worst, std::abs(d));
    }
  }
  return {worst <= kMetricTol, "max abs diff " + fmt("%.3g", worst)};
}

Outcome gradient_check() {
  Rng rng(1003);
  double worst = 0.0;
  for (int round = 0; round < 100; ++round) {
    const auto v = 2 + rng.below(7);
    std::vector<std::string> words;
    for (std::size_t i = 0; i < v; ++i) words.push_back("t" + std::to_string(i));
    RefModel m(words);
    for (auto& x : m.w()) x = 4.0 * rng.uniform() - 2.0;
    for (auto& x : m.a()) x = 4.0 * rng.uniform() - 2.0;
    m.bias() = 2.0 * rng.uniform() - 1.0;
    std::vector<std::string> toks;
    for (auto n = 1 + rng.below(8); n > 0; --n) toks.push_back(words[rng.below(v)]);
    const double y = static_cast<double>(rng.below(2));
    const auto ids = m.encode(toks);
    const auto g = m.gradient(toks, y);
    const auto central = [&](auto perturb) {
      auto w = m.w();
      auto a = m.a();
      double bias = m.bias();
      perturb(w, a, bias, kGradStep);
      const auto up = rbtest::oracle_loss(w, a, bias, ids, y);
      w = m.w();
      a = m.a();
      bias = m.bias();
      perturb(w, a, bias, -kGradStep);
      const auto down = rbtest::oracle_loss(w, a, bias, ids, y);
      return static_cast<double>((up - down) / (2.0L * kGradStep));
    };
    for (std::size_t k = 0; k < m.vocab_size(); ++k) {
      const double nw = central([k](auto& w, auto&, double&, double h) { w[k] += h; });
      const double na = central([k](auto&, auto& a, double&, double h) { a[k] += h; });
      worst = std::max(worst, rbtest::rel_err(g.w.contains(k) ? g.w.at(k) : 0.0, nw));
      worst = std::max(worst, rbtest::rel_err(g.a.contains(k) ? g.a.at(k) : 0.0, na));
    }
    const double nb = central([](auto&, auto&, double& b, double h) { b += h; });
    worst = std::max(worst, rbtest::rel_err(g.bias, nb));
  }
  return {worst < kGradRelTol, "max relative error " + fmt("%.3g", worst)};
}

// ---------------------------------------------------------------------------

ModelHandle handle_for(RefModel m, const std::string& name) {
  return ModelHandle(ModelKind::Reference, name,
                     std::make_unique<ReferenceAdapter>(std::move(m), name));
}

struct ShortcutSetup {
  SynthConfig cfg;
  LabeledCorpus corpus;
  SplitResult split;
  ModelHandle model;
};

SynthConfig shortcut_config() {
  SynthConfig cfg;
  cfg.n = kSynthN;
  cfg.cue_word = "obama";
  cfg.cue_breadth = kCueBreadth;
  cfg.cue_false_share = kCueFalseShare;
  cfg.label_signal = kLabelSignal;
  cfg.seed = kSeed;
  return cfg;
}

ShortcutSetup build_shortcut() {
  const auto cfg = shortcut_config();
  auto corpus = generate(cfg);
  auto split = split_corpus(corpus, SplitConfig{kTrainFraction, kSeed});
  TrainConfig tc;
  tc.epochs = kEpochs;
  tc.seed = kSeed;
  auto model = train(split.train, tc).model;
  return {cfg, std::move(corpus), std::move(split), handle_for(std::move(model), "ref")};
}

std::optional<ShortcutSetup> g_shortcut;

Outcome shortcut_reproduction() {
  g_shortcut.emplace(build_shortcut());
  const auto& s = *g_shortcut;
  const auto counts = synth_counts(s.cfg);
  std::string detail;
  bool ok = true;

  // (a) in-distribution accuracy
  const auto m = evaluate(s.model, s.split.test);
  const bool a_ok = m.accuracy >= kMinTestAccuracy;
  ok = ok && a_ok;
  detail += "(a) test acc " + pct(m.accuracy) + "% " + (a_ok ? "ok" : "LOW");

  // (b) cue scan with default thresholds over the full corpus
  const auto flagged = scan(s.model, s.corpus, CueScanConfig{});
  const double b_unit = 1.0 / static_cast<double>(s.cfg.n);
  const double share_unit = 1.0 / static_cast<double>(counts.n_cue);
  bool b_ok = flagged.size() == 1 && flagged[0].word == s.cfg.cue_word;
  if (b_ok) {
    b_ok = std::abs(flagged[0].breadth_b - s.cfg.cue_breadth) <= b_unit &&
           std::abs(flagged[0].false_share - s.cfg.cue_false_share) <= share_unit;
  }
  ok = ok && b_ok;
  detail += "; (b) flagged [";
  for (std::size_t i = 0; i < flagged.size(); ++i) {
    if (i) detail += ", ";
    detail += flagged[i].word + " s=" + fixed(flagged[i].strength_s, 4) +
              " b=" + pct(flagged[i].breadth_b) + "% share=" +
              pct(flagged[i].false_share) + "%";
  }
  detail += std::string("] ") + (b_ok ? "ok" : "WRONG");

  // (c) label-flipping rewrite of the cue-bearing test samples
  const std::vector<RewriteRule> rules = {
      make_rewrite("cue-negate", s.cfg.cue_word, s.cfg.cue_word + " does not", true)};
  const auto rw = apply_rewrites(s.split.test, rules);
  std::vector<Sample> orig_sub, adv_sub;
  for (std::size_t i = 0; i < s.split.test.size(); ++i) {
    if (s.split.test[i].id != rw.adversarial[i].id) {
      orig_sub.push_back(s.split.test[i]);
      adv_sub.push_back(rw.adversarial[i]);
    }
  }
  const LabeledCorpus orig_rw("rewritten", orig_sub);
  const LabeledCorpus adv_rw("rewritten-adversarial", adv_sub);
  const auto sub = adversarial_eval(s.model, orig_rw, adv_rw);
  const auto full = adversarial_eval(s.model, s.split.test, rw.adversarial);
  const bool c_ok = sub.drop_points >= kMinDropPoints;
  ok = ok && c_ok;
  detail += "; (c) drop on " + std::to_string(sub.n) + " rewritten samples " +
            fixed(sub.drop_points, 2) + " pts " + (c_ok ? "ok" : "SMALL") +
            " (full split " + fixed(full.drop_points, 2) + " pts, informational)";
  return {ok, detail};
}

Outcome consistency_probe() {
  if (!g_shortcut) return {false, "shortcut model unavailable"};
  const auto& s = *g_shortcut;
  // The cue skews False, so probe True samples that lack it.
  std::vector<Sample> pool;
  for (const auto& x : s.split.test) {
    if (pool.size() == kProbeSize) break;
    const auto toks = tokenize(x.text);
    if (x.label == Label::True &&
        std::find(toks.begin(), toks.end(), s.cfg.cue_word) == toks.end()) {
      pool.push_back(x);
    }
  }
  if (pool.size() < kProbeSize) return {false, "fewer than 100 eligible samples"};
  const LabeledCorpus base("probe", pool);
  const auto cue = consistency_eval(s.model, base,
                                    apply_injection(base, make_injection("cue", s.cfg.cue_word)));
  const auto fresh =
      consistency_eval(s.model, base, apply_injection(base, make_injection("fresh", kFreshToken)));
  const bool ok = cue.flip_rate > kMinCueFlipRate && fresh.flip_rate < kMaxFreshFlipRate;
  return {ok, "cue flip rate " + pct(cue.flip_rate) + "%, fresh-token flip rate " +
                  pct(fresh.flip_rate) + "%"};
}

std::string cross_eval_report() {
  std::vector<LabeledCorpus> tests;
  std::vector<ModelHandle> models;
  for (const auto& [cue, seed] : {std::pair<std::string, std::uint64_t>{"obama", 11},
                                  std::pair<std::string, std::uint64_t>{"sydney", 12}}) {
    SynthConfig cfg;
    cfg.n = 600;
    cfg.cue_word = cue;
    cfg.label_signal = kLabelSignal;
    cfg.seed = seed;
    auto split = split_corpus(generate(cfg), SplitConfig{kTrainFraction, seed});
    TrainConfig tc;
    tc.seed = seed;
    models.push_back(handle_for(train(split.train, tc).model, split.train.name()));
    tests.push_back(std::move(split.test));
  }
  std::vector<const ModelHandle*> ptrs = {&models[0], &models[1]};
  const auto m = cross_eval(ptrs, tests, 2);
  if (m.cells.size() != 2 || m.cells[0].size() != 2 || m.cells[1].size() != 2) return "";
  for (const auto& row : m.cells) {
    for (const auto& c : row) {
      if (!c) return "";
    }
  }
  ReportDocument doc{"cross-eval", {eval_matrix_section(m)}, {}, {}};
  return render(doc, ReportFormat::Json);
}

Outcome cross_eval_determinism() {
  const auto first = cross_eval_report();
  if (first.empty()) return {false, "matrix is not 2x2 or has failed cells"};
  const auto second = cross_eval_report();
  return {first == second, first == second ? "2x2, byte-identical across runs"
                                           : "reports differ between runs"};
}

Outcome fixture_reproduction() {
  const auto pairs = load_pairs(rbtest::data_dir() / "commonsense_pairs.jsonl");
  for (const auto& p : pairs) validate_pair(p);
  const auto orig = load_corpus(rbtest::data_dir() / "rewrite_originals.jsonl");
  const auto want = load_corpus(rbtest::data_dir() / "rewrite_expected.jsonl");
  const auto rules = load_rules(rbtest::data_dir() / "default_rules.jsonl");
  const auto got = apply_rewrites(orig, rules.rewrites).adversarial;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < std::min(got.size(), want.size()); ++i) {
    exact += got[i].text == want[i].text && got[i].label == want[i].label &&
             got[i].label != orig[i].label;
  }
  const bool ok = pairs.size() == 4 && got.size() == 3 && exact == 3;
  return {ok, std::to_string(pairs.size()) + " pairs from 8 rows; " + std::to_string(exact) +
                  "/3 rewrites exact"};
}

struct Criterion {
  const char* name;
  double limit_secs;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"worked-example-arithmetic", 1.0, worked_example_arithmetic},
      {"pairt-dominance", 10.0, pairt_dominance},
      {"metric-oracle", 5.0, metric_oracle},
      {"gradient-check", 5.0, gradient_check},
      {"shortcut-reproduction", 60.0, shortcut_reproduction},
      {"consistency-probe", 10.0, consistency_probe},
      {"cross-eval-determinism", 10.0, cross_eval_determinism},
      {"fixture-reproduction", 1.0, fixture_reproduction},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs < c.limit_secs;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << " ["
              << fmt("%.2f", secs) << " s, limit " << fmt("%.0f", c.limit_secs) << " s"
              << (in_time ? "" : ", TOO SLOW") << "]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
