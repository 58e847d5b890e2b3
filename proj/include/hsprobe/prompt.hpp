#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace hsprobe::prompt {

/// The instruction template with {knowledge}, {question} and {answer}
/// placeholders, embedded at build time from resources/prompt_template.txt.
std::string_view template_text();
std::string_view template_version();

/// Single-pass substitution: placeholder-like text inside the fields is
/// copied verbatim. Throws ValidationError on an empty field.
std::string build_prompt(std::string_view knowledge, std::string_view question,
                         std::string_view answer);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);

std::uint64_t prompt_hash(std::string_view knowledge, std::string_view question,
                          std::string_view answer);

std::string hash_to_hex(std::uint64_t h);
std::uint64_t hash_from_hex(std::string_view hex);

}  // namespace hsprobe::prompt
