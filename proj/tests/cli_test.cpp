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

#include "rumorbench/cli.hpp"

#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

namespace rumorbench {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return (rbtest::data_dir() / name).string(); }

// Small labeled corpus on disk plus a reference model trained on it.
class CliFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    std::string text;
    for (int i = 0; i < 30; ++i) {
      text += R"({"id":"f)" + std::to_string(i) + R"(","text":"obama says item )" +
              std::to_string(i) + R"(","label":"false"})" + "\n";
      text += R"({"id":"t)" + std::to_string(i) + R"(","text":"plain report )" +
              std::to_string(i) + R"(","label":"true"})" + "\n";
    }
    rbtest::write_file(corpus(), text);
    const auto r = run({"train-ref", "--corpus", corpus(), "--model-out", model(), "--epochs", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
  }

  std::string corpus() const { return (dir_ / "toy.jsonl").string(); }
  std::string model() const { return (dir_ / "toy-model.json").string(); }

  rbtest::TempDir dir_;
};

TEST(Cli, StatsOnFixture) {
  const auto r = run({"stats", data("rewrite_originals.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["sections"][0]["kind"], "corpus_stats");
  EXPECT_EQ(j["sections"][0]["payload"]["rows"][0]["n_total"], 3);
  EXPECT_EQ(j["config"]["subcommand"], "stats");
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"stats"}).code, 1);
  EXPECT_EQ(run({"stats", "/nonexistent.jsonl"}).code, 1);
  EXPECT_EQ(run({"pairt", "--pairs", data("commonsense_pairs.jsonl")}).code, 1);
  EXPECT_EQ(run({"cues", "--corpus", data("rewrite_originals.jsonl"), "--model", "ref:a",
                 "--model", "ref:b"})
                .code,
            1);
  EXPECT_EQ(run({"eval", "--model", "ref:m.json", "--corpus", data("rewrite_originals.jsonl"),
                 "--jobs", "0"})
                .code,
            1);
  EXPECT_EQ(run({"stats", data("rewrite_originals.jsonl"), "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, RuntimeErrorsExitTwo) {
  const auto r = run({"eval", "--model", "ref:/nonexistent/model.json", "--corpus",
                      data("rewrite_originals.jsonl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, CuesNeedAttention) {
  const auto r = run({"cues", "--corpus", data("rewrite_originals.jsonl"), "--model",
                      "cmd:" + rbtest::mock_adapter() + " keyword"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("capability error:"), std::string::npos) << r.err;
}

TEST_F(CliFixture, PairtWithReferenceModel) {
  const auto r = run({"pairt", "--model", "ref:" + model(), "--pairs", data("commonsense_pairs.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  const auto& m = j["sections"][0]["payload"]["models"][0];
  EXPECT_EQ(m["model"], "toy-model");
  EXPECT_EQ(m["n_pairs"], 4);
  EXPECT_LE(m["pairt_accuracy"].get<double>(), m["standard_accuracy"].get<double>());
}

TEST_F(CliFixture, OutputIsDeterministicAcrossRunsAndJobs) {
  const std::vector<std::string> base = {"cross-eval", "--model", "a=ref:" + model(),
                                         "--model", "b=cmd:" + rbtest::mock_adapter() + " keyword",
                                         "--corpus", corpus()};
  auto with_jobs = [&](const char* j) {
    auto v = base;
    v.insert(v.end(), {"--jobs", j});
    return run(v);
  };
  const auto one = with_jobs("1");
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_EQ(with_jobs("1").out, one.out);
  EXPECT_EQ(with_jobs("4").out, one.out);
  const auto j = nlohmann::json::parse(one.out);
  EXPECT_EQ(j["sections"][0]["payload"]["trained_on"], (nlohmann::json{"a", "b"}));
}

TEST_F(CliFixture, DuplicateModelNamesRejected) {
  const auto r = run({"eval", "--model", "ref:" + model(), "--model", "ref:" + model(),
                      "--corpus", corpus()});
  EXPECT_EQ(r.code, 1);
}

TEST_F(CliFixture, FormatsAndOutFile) {
  const auto md = run({"eval", "--model", "ref:" + model(), "--corpus", corpus(), "--format",
                       "markdown"});
  ASSERT_EQ(md.code, 0) << md.err;
  EXPECT_NE(md.out.find("| Model | Corpus | Accuracy |"), std::string::npos) << md.out;
  const auto csv = run({"eval", "--model", "ref:" + model(), "--corpus", corpus(), "--format",
                        "csv"});
  EXPECT_TRUE(csv.out.starts_with("section,kind,field,value\n"));
  const auto path = (dir_ / "r.json").string();
  const auto to_file = run({"eval", "--model", "ref:" + model(), "--corpus", corpus(), "--out",
                            path});
  EXPECT_TRUE(to_file.out.empty());
  const auto rerender = run({"report", path, "--format", "md"});
  ASSERT_EQ(rerender.code, 0) << rerender.err;
  EXPECT_NE(rerender.out.find("| toy-model | toy |"), std::string::npos) << rerender.out;
}

TEST_F(CliFixture, CuesOnReferenceModel) {
  const auto r = run({"cues", "--model", "ref:" + model(), "--corpus", corpus(), "--format", "md"});
  ASSERT_EQ(r.code, 0) << r.err;
}

TEST_F(CliFixture, PerturbWithInjectionProbe) {
  const auto rules = (dir_ / "rules.jsonl").string();
  rbtest::write_file(rules,
                     R"({"rule_id":"neg","kind":"rewrite","match":"obama says","replacement":"obama does not say"})"
                     "\n"
                     R"({"rule_id":"cue","kind":"inject","cue_phrase":"obama","position":"prepend"})"
                     "\n");
  const auto adv = (dir_ / "adv.jsonl").string();
  const auto pairs = (dir_ / "pairs.jsonl").string();
  const auto r = run({"perturb", "--corpus", corpus(), "--rules", rules, "--adv-out", adv,
                      "--pairs-out", pairs, "--model", "ref:" + model(), "--inject", "cue",
                      "--inject-label", "true"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_pairs(pairs).size(), 30u);
  EXPECT_EQ(load_corpus(adv).size(), 60u);
  const auto j = nlohmann::json::parse(r.out);
  ASSERT_EQ(j["sections"].size(), 3u);
  EXPECT_EQ(j["sections"][1]["payload"]["rows"][1]["corpus"], "toy-rewritten");
  EXPECT_EQ(j["sections"][2]["payload"]["rows"][0]["n"], 30);

  EXPECT_EQ(run({"perturb", "--corpus", corpus(), "--rules", rules, "--inject", "nope",
                 "--model", "ref:" + model()})
                .code,
            1);
  EXPECT_EQ(run({"perturb", "--corpus", corpus(), "--rules", rules, "--inject", "cue"}).code, 1);
}

TEST(Cli, SynthSplitTrainFlow) {
  rbtest::TempDir dir;
  const auto out = (dir / "syn.jsonl").string();
  const auto s = run({"synth", "--n", "400", "--seed", "3", "--label-signal", "0.4",
                      "--corpus-out", out});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "syn.manifest.json"));
  const auto again = (dir / "again.jsonl").string();
  run({"synth", "--n", "400", "--seed", "3", "--label-signal", "0.4", "--corpus-out", again});
  EXPECT_EQ(rbtest::read_file(out), rbtest::read_file(again));

  const auto sp = run({"split", out, "--seed", "1"});
  ASSERT_EQ(sp.code, 0) << sp.err;
  EXPECT_EQ(load_corpus(dir / "syn-train.jsonl").size(), 280u);
  EXPECT_EQ(load_corpus(dir / "syn-test.jsonl").size(), 120u);
  const auto tr = run({"train-ref", "--corpus", (dir / "syn-train.jsonl").string(),
                       "--model-out", (dir / "m.json").string()});
  ASSERT_EQ(tr.code, 0) << tr.err;
  const auto ev = run({"eval", "--model", "ref:" + (dir / "m.json").string(), "--corpus",
                       (dir / "syn-test.jsonl").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
}

TEST(Cli, NamedSpecParsing) {
  EXPECT_EQ(cli::detail::split_named_spec("t15=ref:m.json").name, "t15");
  EXPECT_FALSE(cli::detail::split_named_spec("cmd:x --a=b").name);
  EXPECT_FALSE(cli::detail::split_named_spec("http://h/p?x=1").name);
}

}  // namespace
}  // namespace rumorbench
