#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 text utilities. Lengths are counted in code points so that
// Cyrillic and Latin text are measured the same way.
namespace hsprobe::text {

/// Decodes UTF-8. Invalid bytes decode to U+FFFD, one per byte.
std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);

std::size_t char_length(std::string_view s);

bool is_space(char32_t c);
bool is_decimal_digit(char32_t c);
bool is_punctuation(char32_t c);
char32_t to_lower(char32_t c);

bool contains_decimal_digit(std::string_view s);

/// Whitespace-separated tokens, punctuation kept attached.
std::vector<std::string> split_words(std::string_view s);
std::size_t word_count(std::string_view s);

std::string_view trim(std::string_view s);

}  // namespace hsprobe::text
