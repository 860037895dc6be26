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

#include "rumorbench/tokenize.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

namespace rumorbench {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Obama says, \"Enough is enough!\""),
            (Tokens{"obama", "says", "enough", "is", "enough"}));
}

TEST(Tokenize, KeepsNumbers) {
  EXPECT_EQ(tokenize("Signals from 5G towers can spread COVID-19."),
            (Tokens{"signals", "from", "5g", "towers", "can", "spread", "covid", "19"}));
}

TEST(Tokenize, ApostropheSplitsContractions) {
  EXPECT_EQ(tokenize("wasn't"), (Tokens{"wasn", "t"}));
}

TEST(Tokenize, UnicodeWhitespaceAndQuotes) {
  // NBSP, em space and curly quotes separate words.
  EXPECT_EQ(tokenize("a b “c”"), (Tokens{"a", "b", "c"}));
}

TEST(Tokenize, FoldsNonAsciiCase) {
  EXPECT_EQ(tokenize("ÉCOLE Ÿ ΑΘΗΝΑ МОСКВА"), (Tokens{"école", "ÿ", "αθηνα", "москва"}));
}

TEST(Tokenize, EmptyAndSeparatorOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" .,!? \t\n").empty());
}

TEST(Tokenize, RejectsInvalidUtf8) {
  EXPECT_THROW(tokenize("ab\xff"), DataError);
  EXPECT_THROW(tokenize("\xC3"), DataError);
  EXPECT_FALSE(is_valid_utf8("\xED\xA0\x80"));  // surrogate
}

TEST(Tokenize, OffsetsSpliceBackToSurfaceText) {
  const std::string text = "Hostage situation, “may be” motivated";
  for (const auto& t : tokenize_with_offsets(text)) {
    EXPECT_EQ(tokenize(text.substr(t.begin, t.end - t.begin)), Tokens{t.text});
  }
}

TEST(Tokenize, CanonicalWord) {
  EXPECT_EQ(canonical_word("Obama"), "obama");
  EXPECT_EQ(canonical_word("Obama,"), "obama");
  EXPECT_EQ(canonical_word("##ing"), "ing");
  EXPECT_EQ(canonical_word("New York"), "new york");
  EXPECT_EQ(codepoint_length("école"), 5u);
}

// Property: tokenizing the space-joined tokens of any text is a fixpoint.
TEST(TokenizeProperty, IdempotentOnJoinedTokens) {
  Rng rng(7);
  const std::vector<std::string> alphabet = {"a", "B", "7", " ", ",", "!", "é", "Ж",
                                             "’", " ", "-", "x"};
  for (int round = 0; round < 500; ++round) {
    std::string text;
    const auto len = rng.below(20);
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    const auto toks = tokenize(text);
    std::string joined;
    for (const auto& t : toks) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined), toks) << text;
    for (const auto& t : toks) EXPECT_FALSE(t.empty());
  }
}

}  // namespace
}  // namespace rumorbench
