#include "hsprobe/text.hpp"

#include <algorithm>
#include <iterator>

namespace hsprobe::text {
namespace {

struct CodePair {
  char32_t first;
  char32_t second;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodePair (&table)[N], char32_t c) {
  auto it = std::upper_bound(
      std::begin(table), std::end(table), c,
      [](char32_t v, const CodePair& r) { return v < r.first; });
  if (it == std::begin(table)) return false;
  --it;
  return c <= it->second;
}

void append_utf8(std::string& out, char32_t c) {
  if (c < 0x80) {
    out.push_back(static_cast<char>(c));
  } else if (c < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (c >> 6)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else if (c < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (c >> 12)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (c >> 18)));
    out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
  }
}

}  // namespace

std::u32string decode_utf8(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    int extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
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
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    bool ok = true;
    for (int k = 1; k <= extra; ++k) {
      if (i + k >= s.size()) {
        ok = false;
        break;
      }
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
        break;
      }
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += static_cast<std::size_t>(extra) + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t c : s) append_utf8(out, c);
  return out;
}

std::size_t char_length(std::string_view s) { return decode_utf8(s).size(); }

bool is_space(char32_t c) {
  switch (c) {
    case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

bool is_decimal_digit(char32_t c) { return in_ranges(kDecimalDigits, c); }

bool is_punctuation(char32_t c) { return in_ranges(kPunctuation, c); }

char32_t to_lower(char32_t c) {
  if (c < 0x80) return (c >= U'A' && c <= U'Z') ? c + 32 : c;
  auto it = std::lower_bound(
      std::begin(kLowercase), std::end(kLowercase), c,
      [](const CodePair& m, char32_t v) { return m.first < v; });
  if (it != std::end(kLowercase) && it->first == c) return it->second;
  return c;
}

bool contains_decimal_digit(std::string_view s) {
  const auto cps = decode_utf8(s);
  return std::any_of(cps.begin(), cps.end(), is_decimal_digit);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::u32string current;
  for (char32_t c : decode_utf8(s)) {
    if (is_space(c)) {
      if (!current.empty()) words.push_back(encode_utf8(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) words.push_back(encode_utf8(current));
  return words;
}

std::size_t word_count(std::string_view s) { return split_words(s).size(); }

std::string_view trim(std::string_view s) {
  // Only ASCII whitespace and NBSP are trimmed here; both are single
  // code units or a fixed two-byte sequence.
  auto is_ascii_ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
           c == '\f';
  };
  while (!s.empty()) {
    if (is_ascii_ws(s.front())) {
      s.remove_prefix(1);
    } else if (s.size() >= 2 && s[0] == '\xC2' && s[1] == '\xA0') {
      s.remove_prefix(2);
    } else {
      break;
    }
  }
  while (!s.empty()) {
    if (is_ascii_ws(s.back())) {
      s.remove_suffix(1);
    } else if (s.size() >= 2 && s[s.size() - 2] == '\xC2' &&
               s.back() == '\xA0') {
      s.remove_suffix(2);
    } else {
      break;
    }
  }
  return s;
}

}  // namespace hsprobe::text
