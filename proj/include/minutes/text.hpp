#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace minutes::text {

// Unicode whitespace code points beyond ASCII that we honor when splitting.
inline bool is_space_cp(uint32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

// Decodes one UTF-8 code point starting at i; advances i past it.
// Invalid bytes are treated as single-byte code points.
inline uint32_t decode_utf8(std::string_view s, size_t& i) {
  unsigned char c = static_cast<unsigned char>(s[i]);
  size_t len = 1;
  uint32_t cp = c;
  if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
  else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
  else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
  if (i + len > s.size()) len = 1;
  for (size_t k = 1; k < len; ++k) {
    unsigned char cc = static_cast<unsigned char>(s[i + k]);
    if ((cc & 0xC0) != 0x80) { len = k; break; }
    cp = (cp << 6) | (cc & 0x3F);
  }
  i += len;
  return len == 1 ? static_cast<uint32_t>(c) : cp;
}

// Word = maximal run of non-whitespace characters.
inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  size_t i = 0;
  size_t word_start = 0;
  bool in_word = false;
  while (i < s.size()) {
    size_t here = i;
    uint32_t cp = decode_utf8(s, i);
    if (is_space_cp(cp)) {
      if (in_word) {
        words.emplace_back(s.substr(word_start, here - word_start));
        in_word = false;
      }
    } else if (!in_word) {
      word_start = here;
      in_word = true;
    }
  }
  if (in_word) words.emplace_back(s.substr(word_start));
  return words;
}

inline size_t count_words(std::string_view s) { return split_words(s).size(); }

inline std::string join_words(const std::vector<std::string>& words,
                              std::string_view sep = " ") {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i) out += sep;
    out += words[i];
  }
  return out;
}

}  // namespace minutes::text
