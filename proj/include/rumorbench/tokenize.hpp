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

// The canonical tokenizer shared by the reference model, the cue scanner and
// the rewrite engine. Token identity must agree across all three, so there is
// exactly one implementation.
//
// Rules: lowercase (simple folding for Latin, Greek and Cyrillic), split on
// Unicode whitespace and punctuation, drop empty tokens, keep numbers.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rumorbench/common.hpp"

namespace rumorbench {

inline constexpr std::string_view kTokenizerVersion = "rb-tok-1";

struct Token {
  std::string text;  // folded form
  std::size_t begin = 0;  // byte offsets into the source string
  std::size_t end = 0;
};

namespace detail {

struct DecodedCodepoint {
  char32_t cp;
  std::size_t length;
};

// Returns nullopt on malformed UTF-8 (overlong, surrogate, truncated).
inline std::optional<DecodedCodepoint> decode_utf8(std::string_view s,
                                                   std::size_t pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) return DecodedCodepoint{b0, 1};
  std::size_t len = 0;
  char32_t cp = 0;
  char32_t min = 0;
  if ((b0 & 0xE0) == 0xC0) {
    len = 2;
    cp = b0 & 0x1F;
    min = 0x80;
  } else if ((b0 & 0xF0) == 0xE0) {
    len = 3;
    cp = b0 & 0x0F;
    min = 0x800;
  } else if ((b0 & 0xF8) == 0xF0) {
    len = 4;
    cp = b0 & 0x07;
    min = 0x10000;
  } else {
    return std::nullopt;
  }
  if (pos + len > s.size()) return std::nullopt;
  for (std::size_t i = 1; i < len; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) return std::nullopt;
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    return std::nullopt;
  }
  return DecodedCodepoint{cp, len};
}

inline void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

inline bool is_space(char32_t c) {
  if (c == ' ' || (c >= 0x09 && c <= 0x0D)) return true;
  switch (c) {
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200B;
  }
}

inline bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E) || c < 0x20 ||
           c == 0x7F;
  }
  if (c >= 0xA1 && c <= 0xBF) {
    // ª ² ³ µ ¹ º ¼ ½ ¾ are letter- or number-like.
    switch (c) {
      case 0xAA: case 0xB2: case 0xB3: case 0xB5: case 0xB9: case 0xBA:
      case 0xBC: case 0xBD: case 0xBE:
        return false;
      default:
        return true;
    }
  }
  return c == 0xD7 || c == 0xF7 || (c >= 0x2010 && c <= 0x2027) ||
         (c >= 0x2030 && c <= 0x205E) || (c >= 0x2E00 && c <= 0x2E7F) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) ||
         (c >= 0x3014 && c <= 0x301F) || (c >= 0xFE10 && c <= 0xFE19) ||
         (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65);
}

inline char32_t fold_case(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0xC0) return c;
  if ((c >= 0xC0 && c <= 0xDE && c != 0xD7)) return c + 0x20;
  if (c >= 0x100 && c <= 0x17F) {
    // Latin Extended-A alternates upper/lower, with a parity shift in the
    // 0x139-0x148 and 0x179-0x17E runs.
    const bool odd_run = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
    if (c == 0x178) return 0xFF;
    if (c == 0x130 || c == 0x131 || c == 0x138 || c == 0x149 || c == 0x17F) {
      return c;
    }
    if (odd_run) return (c % 2 == 1) ? c + 1 : c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

}  // namespace detail

inline bool is_valid_utf8(std::string_view s) {
  for (std::size_t pos = 0; pos < s.size();) {
    const auto d = detail::decode_utf8(s, pos);
    if (!d) return false;
    pos += d->length;
  }
  return true;
}

// Tokenizes `text`, keeping byte offsets so callers can splice the original
// surface string. Throws DataError on invalid UTF-8.
inline std::vector<Token> tokenize_with_offsets(std::string_view text) {
  std::vector<Token> out;
  Token current;
  bool in_token = false;
  for (std::size_t pos = 0; pos < text.size();) {
    const auto d = detail::decode_utf8(text, pos);
    if (!d) {
      throw DataError("invalid UTF-8 at byte " + std::to_string(pos));
    }
    const bool separator = detail::is_space(d->cp) || detail::is_punct(d->cp);
    if (separator) {
      if (in_token) {
        current.end = pos;
        out.push_back(std::move(current));
        current = Token{};
        in_token = false;
      }
    } else {
      if (!in_token) {
        current.begin = pos;
        in_token = true;
      }
      detail::append_utf8(current.text, detail::fold_case(d->cp));
    }
    pos += d->length;
  }
  if (in_token) {
    current.end = text.size();
    out.push_back(std::move(current));
  }
  return out;
}

inline std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize_with_offsets(text)) out.push_back(std::move(t.text));
  return out;
}

// Canonical form of a single word as emitted by an external adapter
// ("Obama," -> "obama", "##ing" -> "ing"). Strings holding several words
// fold case without splitting. Adapters that attend over subword pieces
// should merge them into words before reporting.
inline std::string canonical_word(std::string_view word) {
  auto toks = tokenize_with_offsets(word);
  if (toks.size() == 1) return std::move(toks.front().text);
  std::string out;
  for (std::size_t pos = 0; pos < word.size();) {
    const auto d = detail::decode_utf8(word, pos);
    if (!d) throw DataError("invalid UTF-8 in token");
    detail::append_utf8(out, detail::fold_case(d->cp));
    pos += d->length;
  }
  return out;
}

inline std::size_t codepoint_length(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

}  // namespace rumorbench
