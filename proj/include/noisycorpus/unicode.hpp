// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "noisycorpus/errors.hpp"

namespace noisycorpus {

// The character unit everywhere is the Unicode scalar value (no grapheme
// clustering), so all text crosses this boundary exactly once per direction.

// Reserved placeholder code points of the external encoding schema.
// They stand for insertion and deletion respectively and must never occur
// in corpus text; parsers reject them instead of escaping.
inline constexpr char32_t kInsertionPlaceholder = U'¬';  // ¬
inline constexpr char32_t kDeletionPlaceholder = U'¦';   // ¦

inline bool is_placeholder(char32_t c) {
  return c == kInsertionPlaceholder || c == kDeletionPlaceholder;
}

// Whitespace for tokenization and the encoding schema: ASCII whitespace
// plus the common Unicode space separators.
inline bool is_whitespace(char32_t c) {
  switch (c) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case U' ':
    case U' ':
    case U' ':
    case U'　':
      return true;
    default:
      return c >= U' ' && c <= U' ';
  }
}

// Strict UTF-8 decoder. Overlong forms, surrogates, values above U+10FFFF
// and truncated sequences are parse errors.
inline std::u32string utf8_decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  const auto* p = reinterpret_cast<const unsigned char*>(text.data());
  std::size_t n = text.size();
  std::size_t i = 0;
  while (i < n) {
    unsigned char b0 = p[i];
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      throw ParseError("invalid UTF-8 lead byte at offset " + std::to_string(i));
    }
    if (i + len > n) throw ParseError("truncated UTF-8 sequence at offset " + std::to_string(i));
    for (std::size_t k = 1; k < len; ++k) {
      unsigned char b = p[i + k];
      if ((b & 0xC0) != 0x80)
        throw ParseError("invalid UTF-8 continuation byte at offset " + std::to_string(i + k));
      cp = (cp << 6) | (b & 0x3F);
    }
    static constexpr char32_t kMinByLen[5] = {0, 0, 0x80, 0x800, 0x10000};
    if (len > 1 && cp < kMinByLen[len])
      throw ParseError("overlong UTF-8 sequence at offset " + std::to_string(i));
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF))
      throw ParseError("invalid code point in UTF-8 at offset " + std::to_string(i));
    out.push_back(cp);
    i += len;
  }
  return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
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

inline std::string utf8_encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) utf8_append(out, cp);
  return out;
}

inline std::string utf8_encode(char32_t cp) {
  std::string out;
  utf8_append(out, cp);
  return out;
}

inline bool contains_placeholder(std::u32string_view s) {
  for (char32_t c : s)
    if (is_placeholder(c)) return true;
  return false;
}

inline bool contains_placeholder(std::string_view utf8) {
  return contains_placeholder(utf8_decode(utf8));
}

// Splits on runs of whitespace; never yields empty tokens.
inline std::vector<std::u32string> split_words(std::u32string_view s) {
  std::vector<std::u32string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_whitespace(s[i])) ++i;
    std::size_t start = i;
    while (i < s.size() && !is_whitespace(s[i])) ++i;
    if (i > start) words.emplace_back(s.substr(start, i - start));
  }
  return words;
}

inline std::vector<std::string> split_words_utf8(std::string_view s) {
  std::vector<std::string> out;
  for (const auto& w : split_words(utf8_decode(s))) out.push_back(utf8_encode(w));
  return out;
}

}  // namespace noisycorpus
