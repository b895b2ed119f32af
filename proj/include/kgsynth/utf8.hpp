#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kgsynth/error.hpp"

namespace kgsynth::utf8 {

inline constexpr char32_t kInvalid = 0xFFFFFFFF;

constexpr bool is_continuation(unsigned char b) noexcept { return (b & 0xC0) == 0x80; }

// Decodes the scalar starting at text[pos]; advances pos. Returns kInvalid on
// malformed input (pos still advances by one byte).
inline char32_t decode_at(std::string_view text, std::size_t& pos) noexcept {
  const auto b0 = static_cast<unsigned char>(text[pos]);
  int extra;
  char32_t cp;
  if (b0 < 0x80) {
    ++pos;
    return b0;
  } else if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kInvalid;
  }
  if (pos + extra >= text.size()) {
    ++pos;
    return kInvalid;
  }
  for (int k = 1; k <= extra; ++k) {
    const auto b = static_cast<unsigned char>(text[pos + k]);
    if (!is_continuation(b)) {
      ++pos;
      return kInvalid;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  static constexpr char32_t kMin[] = {0, 0x80, 0x800, 0x10000};
  if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
    ++pos;
    return kInvalid;
  }
  pos += extra + 1;
  return cp;
}

// Full decode; throws ValidationError on malformed UTF-8.
inline std::vector<char32_t> decode(std::string_view text) {
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t at = pos;
    const char32_t cp = decode_at(text, pos);
    if (cp == kInvalid)
      throw ValidationError("invalid UTF-8 at byte " + std::to_string(at));
    out.push_back(cp);
  }
  return out;
}

inline void append(std::string& out, char32_t cp) {
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

inline std::string encode(char32_t cp) {
  std::string s;
  append(s, cp);
  return s;
}

// Letters and digits for token-boundary purposes. ASCII is classified
// exactly; outside ASCII everything counts as a word character except the
// Latin-1 punctuation block, general punctuation, and CJK punctuation.
constexpr bool is_word(char32_t cp) noexcept {
  if (cp < 0x80) {
    return (cp >= '0' && cp <= '9') || (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
  }
  if (cp >= 0xA0 && cp <= 0xBF) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x206F) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp == 0xFEFF) return false;
  return true;
}

// Scalar ending right before byte offset `end` (end > 0).
inline char32_t decode_before(std::string_view text, std::size_t end) noexcept {
  std::size_t start = end - 1;
  int steps = 0;
  while (start > 0 && is_continuation(static_cast<unsigned char>(text[start])) && steps < 3) {
    --start;
    ++steps;
  }
  std::size_t pos = start;
  const char32_t cp = decode_at(text, pos);
  return pos == end ? cp : kInvalid;
}

// True if no word character touches the span [begin, end) from outside.
inline bool is_token_span(std::string_view text, std::size_t begin, std::size_t end) noexcept {
  if (begin > 0 && is_word(decode_before(text, begin))) return false;
  if (end < text.size()) {
    std::size_t pos = end;
    if (is_word(decode_at(text, pos))) return false;
  }
  return true;
}

}  // namespace kgsynth::utf8
