#include "hsprobe/prompt.hpp"

#include <array>
#include <cstdio>
#include <stdexcept>

#include "hsprobe/error.hpp"
#include "resources.hpp"

namespace hsprobe::prompt {
namespace {

constexpr std::array<std::string_view, 3> kFields = {"{knowledge}", "{question}",
                                                     "{answer}"};

// Literal text around the three placeholders, which must each occur once and
// in field order.
struct Segments {
  std::array<std::string_view, 4> literal;
};

Segments split_template() {
  const std::string_view t = resources::prompt_template;
  Segments s;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < kFields.size(); ++k) {
    const auto at = t.find(kFields[k], pos);
    if (at == std::string_view::npos) {
      throw std::logic_error("prompt template lacks " + std::string(kFields[k]));
    }
    s.literal[k] = t.substr(pos, at - pos);
    pos = at + kFields[k].size();
  }
  s.literal[3] = t.substr(pos);
  return s;
}

const Segments& segments() {
  static const Segments s = split_template();
  return s;
}

}  // namespace

std::string_view template_text() { return resources::prompt_template; }

std::string_view template_version() { return "v1"; }

std::string build_prompt(std::string_view knowledge, std::string_view question,
                         std::string_view answer) {
  const std::array<std::string_view, 3> values = {knowledge, question, answer};
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].empty()) {
      throw ValidationError("prompt field " + std::string(kFields[k]) + " is empty");
    }
  }
  const auto& s = segments();
  std::string out;
  out.reserve(s.literal[0].size() + s.literal[1].size() + s.literal[2].size() +
              s.literal[3].size() + knowledge.size() + question.size() +
              answer.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    out.append(s.literal[k]);
    out.append(values[k]);
  }
  out.append(s.literal[3]);
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t prompt_hash(std::string_view knowledge, std::string_view question,
                          std::string_view answer) {
  return fnv1a64(build_prompt(knowledge, question, answer));
}

std::string hash_to_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::uint64_t hash_from_hex(std::string_view hex) {
  if (hex.size() != 16) throw FormatError("prompt hash must be 16 hex digits");
  std::uint64_t h = 0;
  for (char c : hex) {
    h <<= 4;
    if (c >= '0' && c <= '9') {
      h |= static_cast<std::uint64_t>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      h |= static_cast<std::uint64_t>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      h |= static_cast<std::uint64_t>(c - 'A' + 10);
    } else {
      throw FormatError("invalid hex digit in prompt hash");
    }
  }
  return h;
}

}  // namespace hsprobe::prompt
