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

#include "rumorbench/refmodel.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "rumorbench/adapters.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace rumorbench {
namespace {

using rbtest::sample;

using rbtest::oracle_loss;
using rbtest::rel_err;

TEST(RefModel, OovSlotAndZeroInit) {
  RefModel m({"b", "a"});
  EXPECT_EQ(m.vocab().front(), kOovToken);
  EXPECT_EQ(m.index_of("b"), 1u);
  EXPECT_EQ(m.index_of("never"), 0u);
  const auto r = m.forward(std::vector<std::string>{"a", "zzz"});
  EXPECT_DOUBLE_EQ(r.score, 0.5);
  EXPECT_DOUBLE_EQ(r.attention[0].weight, 0.5);
  EXPECT_EQ(r.attention[1].token, "zzz");
}

TEST(RefModel, ForwardMatchesDefinition) {
  RefModel m({"x", "y"});
  m.w() = {0.0, 2.0, -1.0};
  m.a() = {0.0, std::log(3.0), 0.0};
  m.bias() = 0.25;
  const auto r = m.forward(std::vector<std::string>{"x", "y"});
  EXPECT_NEAR(r.attention[0].weight, 0.75, 1e-15);
  EXPECT_NEAR(r.z, 0.75 * 2.0 - 0.25 + 0.25, 1e-15);
  EXPECT_NEAR(r.score, 1.0 / (1.0 + std::exp(-r.z)), 1e-15);
  EXPECT_THROW(m.forward(std::vector<std::string>{}), DataError);
}

TEST(RefModel, AttentionSumsToOne) {
  Rng rng(2);
  RefModel m({"a", "b", "c"});
  for (auto& x : m.a()) x = 40.0 * (rng.uniform() - 0.5);
  const auto r = m.forward(std::vector<std::string>{"a", "b", "a", "c", "q"});
  EXPECT_TRUE(attention_is_normalized(r.attention));
}

TEST(RefModel, GradientMatchesFiniteDifferences) {
  Rng rng(1234);
  constexpr double h = 1e-5;
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
    EXPECT_NEAR(g.loss, static_cast<double>(oracle_loss(m.w(), m.a(), m.bias(), ids, y)), 1e-12);

    for (std::size_t k = 0; k < m.vocab_size(); ++k) {
      for (int which = 0; which < 2; ++which) {
        auto w = m.w();
        auto a = m.a();
        auto& p = which == 0 ? w[k] : a[k];
        const double base = p;
        p = base + h;
        const auto up = oracle_loss(w, a, m.bias(), ids, y);
        p = base - h;
        const auto down = oracle_loss(w, a, m.bias(), ids, y);
        const double numeric = static_cast<double>((up - down) / (2.0L * h));
        const auto& sparse = which == 0 ? g.w : g.a;
        const double analytic = sparse.contains(k) ? sparse.at(k) : 0.0;
        const double e = rel_err(analytic, numeric);
        worst = std::max(worst, e);
        EXPECT_LT(e, 1e-4) << "round " << round << (which ? " a[" : " w[") << k << "]";
      }
    }
    const auto up = oracle_loss(m.w(), m.a(), m.bias() + h, ids, y);
    const auto down = oracle_loss(m.w(), m.a(), m.bias() - h, ids, y);
    EXPECT_LT(rel_err(g.bias, static_cast<double>((up - down) / (2.0L * h))), 1e-4);
  }
  RecordProperty("worst_relative_error", std::to_string(worst));
}

LabeledCorpus toy() {
  std::vector<Sample> s;
  for (int i = 0; i < 20; ++i) {
    s.push_back(sample("f" + std::to_string(i), "fake news item " + std::to_string(i), Label::False));
    s.push_back(sample("t" + std::to_string(i), "real report item " + std::to_string(i), Label::True));
  }
  return LabeledCorpus("toy", s);
}

TEST(Train, FitsSeparableCorpus) {
  const auto r = train(toy(), {});
  EXPECT_EQ(r.train_accuracy, 1.0);
  EXPECT_LT(r.final_loss, 0.1);
  EXPECT_GT(r.model.forward_text("fake").score, 0.5);
  EXPECT_LT(r.model.forward_text("real").score, 0.5);
}

TEST(Train, DeterministicGivenSeed) {
  TrainConfig cfg;
  cfg.seed = 17;
  EXPECT_EQ(train(toy(), cfg).model, train(toy(), cfg).model);
  cfg.batch_size = 3;
  const auto a = train(toy(), cfg).model;
  cfg.seed = 18;
  EXPECT_FALSE(a == train(toy(), cfg).model);
}

TEST(Train, RejectsBadInput) {
  const LabeledCorpus one("c", {sample("a", "x", Label::True), sample("b", "y", Label::True)});
  EXPECT_THROW(train(one, {}), DataError);
  TrainConfig cfg;
  cfg.epochs = 0;
  EXPECT_THROW(train(toy(), cfg), DataError);
  cfg = {};
  cfg.learning_rate = 0.0;
  EXPECT_THROW(train(toy(), cfg), DataError);
  const LabeledCorpus punct("c", {sample("a", "x", Label::True), sample("b", "?!", Label::False)});
  EXPECT_THROW(train(punct, {}), DataError);
}

TEST(ModelFile, RoundTrip) {
  rbtest::TempDir dir;
  const auto m = train(toy(), {}).model;
  m.save(dir / "m.json");
  EXPECT_EQ(RefModel::load(dir / "m.json"), m);
  const auto j = nlohmann::json::parse(rbtest::read_file(dir / "m.json"));
  for (const char* k : {"vocab", "w", "a", "bias", "tokenizer_version"}) EXPECT_TRUE(j.contains(k));
}

TEST(ModelFile, Validation) {
  auto j = RefModel({"x"}).to_json();
  j["tokenizer_version"] = "other";
  EXPECT_THROW(RefModel::from_json(j), DataError);
  j = RefModel({"x"}).to_json();
  j["w"] = {1.0};
  EXPECT_THROW(RefModel::from_json(j), DataError);
  j = RefModel({"x"}).to_json();
  j["vocab"]["x"] = 0;
  EXPECT_THROW(RefModel::from_json(j), DataError);
  EXPECT_THROW(RefModel::load("/nonexistent/m.json"), DataError);
}

TEST(ReferenceAdapter, AdvertisesAttention) {
  rbtest::TempDir dir;
  train(toy(), {}).model.save(dir / "toy-model.json");
  const auto h = open_model("ref:" + (dir / "toy-model.json").string());
  EXPECT_EQ(h.name(), "toy-model");
  EXPECT_TRUE(h.has_attention());
  const auto p = h.predict_batch(toy());
  for (const auto& x : p) {
    ASSERT_TRUE(x.attention);
    EXPECT_TRUE(attention_is_normalized(*x.attention));
  }
}

}  // namespace
}  // namespace rumorbench
