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

// Runs the protocol conformance checks against one adapter.
//
//   rumorbench_conformance --model cmd:./adapter [--pairs F] [--corpus F]
//
// Samples come from the given fixture files (pair members are flattened).
// Prints one PASS/FAIL line per check; exit 0 iff all pass.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rumorbench/adapters.hpp"
#include "rumorbench/conformance.hpp"
#include "rumorbench/corpus.hpp"
#include "rumorbench/pairt.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Prediction protocol conformance suite", "rumorbench_conformance"};
  std::string model;
  std::vector<std::string> pairs;
  std::vector<std::string> corpora;
  double timeout_secs = 30.0;
  app.add_option("--model", model, "Adapter specifier (cmd:... or http:...)")->required();
  app.add_option("--pairs", pairs, "Pair fixture files")->check(CLI::ExistingFile);
  app.add_option("--corpus", corpora, "Corpus fixture files")->check(CLI::ExistingFile);
  app.add_option("--timeout-secs", timeout_secs)->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    std::vector<rumorbench::Sample> samples;
    for (const auto& p : pairs) {
      for (const auto& pc : rumorbench::load_pairs(p)) {
        samples.push_back(pc.a);
        samples.push_back(pc.b);
      }
    }
    for (const auto& c : corpora) {
      for (const auto& s : rumorbench::load_corpus(c)) samples.push_back(s);
    }
    const auto ms = rumorbench::parse_model_spec(model);
    auto adapter = rumorbench::make_adapter(
        ms, std::chrono::milliseconds(static_cast<long long>(timeout_secs * 1000)));
    const auto report = rumorbench::run_conformance(*adapter, samples);
    for (const auto& c : report.checks) {
      std::cout << (c.passed ? "PASS " : "FAIL ") << c.name;
      if (!c.passed) std::cout << ": " << c.detail;
      std::cout << "\n";
    }
    return report.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
