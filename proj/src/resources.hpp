#pragma once

#include <string_view>

// Defined in the build-generated resources.cpp.
namespace hsprobe::resources {
extern const std::string_view prompt_template;
extern const std::string_view paraphrase_prompt;
}  // namespace hsprobe::resources
