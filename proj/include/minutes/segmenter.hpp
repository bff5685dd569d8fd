#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace minutes::segmenter {

struct Chapter {
  size_t index = 0;         // 0-based
  std::vector<std::string> words;
  size_t start_offset = 0;  // word index into the flattened transcript
};

struct SegmentationConfig {
  size_t max_words = 2500;
};

// First min(n, |words|) words of the input.
inline std::vector<std::string> truncate(const std::vector<std::string>& words,
                                         size_t n) {
  if (n == 0) throw std::invalid_argument("truncate: n must be >= 1");
  if (words.size() <= n) return words;
  return {words.begin(), words.begin() + static_cast<ptrdiff_t>(n)};
}

// Sequential non-overlapping n-word windows; the last window may be shorter.
inline std::vector<Chapter> chapterize(const std::vector<std::string>& words,
                                       size_t n) {
  if (n == 0) throw std::invalid_argument("chapterize: n must be >= 1");
  if (words.empty()) throw std::invalid_argument("chapterize: empty input");
  std::vector<Chapter> chapters;
  for (size_t off = 0; off < words.size(); off += n) {
    Chapter ch;
    ch.index = chapters.size();
    ch.start_offset = off;
    size_t end = std::min(off + n, words.size());
    ch.words.assign(words.begin() + static_cast<ptrdiff_t>(off),
                    words.begin() + static_cast<ptrdiff_t>(end));
    chapters.push_back(std::move(ch));
  }
  return chapters;
}

}  // namespace minutes::segmenter
