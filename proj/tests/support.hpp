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

// Shared helpers for the test binaries: in-process adapters, temporary
// directories and small random generators.

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "rumorbench/common.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/protocol.hpp"
#include "rumorbench/tokenize.hpp"

namespace rbtest {

using namespace rumorbench;

inline std::filesystem::path data_dir() { return RB_DATA_DIR; }
inline std::string mock_adapter() { return RB_MOCK_ADAPTER; }

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("rbtest-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// In-process adapter driven by a scoring function. With attention on,
// weights are uniform over tokens unless `attend` is given.
class FnAdapter : public Adapter {
 public:
  using Scorer = std::function<double(const Sample&)>;
  using Attender = std::function<AttentionVector(const std::vector<std::string>&)>;

  FnAdapter(std::string name, Scorer score, bool attention = false, Attender attend = {})
      : name_(std::move(name)), score_(std::move(score)), attention_(attention),
        attend_(std::move(attend)) {}

  HelloInfo hello() override {
    HelloInfo h{name_, {}};
    if (attention_) h.capabilities.insert(std::string(kAttentionCapability));
    return h;
  }

  std::vector<PredictOutcome> predict(std::span<const Sample> samples) override {
    std::vector<PredictOutcome> out;
    for (const auto& s : samples) {
      ++calls;
      auto p = make_prediction(s.id, score_(s));
      if (attention_) {
        const auto toks = tokenize(s.text);
        if (attend_) {
          p.attention = attend_(toks);
        } else {
          AttentionVector v;
          for (const auto& t : toks) v.push_back({t, 1.0 / static_cast<double>(toks.size())});
          p.attention = v;
        }
      }
      out.push_back({s.id, p, {}});
    }
    return out;
  }

  bool concurrent() const override { return true; }

  std::atomic<std::size_t> calls{0};

 private:
  std::string name_;
  Scorer score_;
  bool attention_;
  Attender attend_;
};

inline ModelHandle fn_handle(std::string name, FnAdapter::Scorer score, bool attention = false,
                             FnAdapter::Attender attend = {}) {
  return ModelHandle(ModelKind::Reference, name,
                     std::make_unique<FnAdapter>(name, std::move(score), attention,
                                                 std::move(attend)));
}

inline ModelHandle constant_handle(Label l) {
  return fn_handle(l == Label::False ? "always-false" : "always-true",
                   [l](const Sample&) { return l == Label::False ? 0.9 : 0.1; });
}

inline Sample sample(std::string id, std::string text, Label label) {
  Sample s;
  s.id = std::move(id);
  s.text = std::move(text);
  s.label = label;
  return s;
}

inline Label random_label(Rng& rng) { return rng.below(2) == 0 ? Label::True : Label::False; }

// Corpus of `n` samples over words "v0".."v{vocab-1}".
inline LabeledCorpus random_corpus(Rng& rng, std::size_t n, std::size_t vocab,
                                   std::size_t max_len = 6, std::string name = "rand") {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto len = 1 + rng.below(max_len);
    std::string text;
    for (std::size_t k = 0; k < len; ++k) {
      if (k) text += ' ';
      text += "v" + std::to_string(rng.below(vocab));
    }
    out.push_back(sample("r" + std::to_string(i), text, random_label(rng)));
  }
  return LabeledCorpus(std::move(name), std::move(out));
}

}  // namespace rbtest
