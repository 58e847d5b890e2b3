#include "doctest.h"
#include "hsprobe/text.hpp"

using namespace hsprobe::text;

TEST_CASE("utf8 roundtrip and code point length") {
  const std::string s = "Привет, мир! ok";
  CHECK(encode_utf8(decode_utf8(s)) == s);
  CHECK(char_length(s) == 15);
  CHECK(char_length("") == 0);
  // Lone continuation byte becomes one replacement character.
  CHECK(decode_utf8("a\x80" "b") == std::u32string{U'a', 0xFFFD, U'b'});
}

TEST_CASE("character classes") {
  CHECK(is_punctuation(U','));
  CHECK(is_punctuation(U'«'));
  CHECK(is_punctuation(U'—'));
  CHECK_FALSE(is_punctuation(U'a'));
  CHECK_FALSE(is_punctuation(U'+'));  // Sm, not P*
  CHECK(is_decimal_digit(U'7'));
  CHECK(is_decimal_digit(0x0663));  // ARABIC-INDIC DIGIT THREE
  CHECK_FALSE(is_decimal_digit(U'½'));
  CHECK(to_lower(U'Ж') == U'ж');
  CHECK(to_lower(U'Q') == U'q');
  CHECK(to_lower(U'5') == U'5');
  CHECK(is_space(0xA0));
}

TEST_CASE("words") {
  CHECK(split_words("  one\ttwo three ") == std::vector<std::string>{"one", "two", "three"});
  CHECK(word_count("Восемь лет назад.") == 3);
  CHECK(word_count("") == 0);
  CHECK(contains_decimal_digit("in 1812"));
  CHECK_FALSE(contains_decimal_digit("eighteen twelve"));
  CHECK(trim("  x y \n") == "x y");
}
