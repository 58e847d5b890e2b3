#pragma once

#include <array>
#include <chrono>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "hsprobe/augment.hpp"
#include "hsprobe/corpus.hpp"

// Optional online source of rewrite variants through a chat-completion
// endpoint. The offline path reads RewriteSets from a file instead.
namespace hsprobe::augment {

/// The rewriting request for one answer.
std::string paraphrase_prompt(std::string_view answer);

/// Extracts the "#1#", "#2#", "#3#" variants in marker order. Throws
/// FormatError (carrying the raw response) when a marker is missing,
/// duplicated or empty.
std::array<std::string, 3> parse_rewrite_response(std::string_view response);

/// Sends one prompt, returns the assistant's text.
using CompletionFn = std::function<std::string(const std::string& prompt)>;

struct EndpointConfig {
  /// e.g. "https://api.example.com/v1"; "/chat/completions" is appended.
  std::string base_url;
  std::string model;
  std::string token_env = "HSPROBE_API_KEY";
  std::chrono::seconds timeout{60};
};

/// HTTP client for the generic chat-completion JSON convention.
CompletionFn http_completion(const EndpointConfig& config);

struct FetchOptions {
  /// Extra attempts after a response that does not parse.
  int max_retries = 2;
  /// Minimum spacing between consecutive requests.
  std::chrono::milliseconds min_interval{0};
  /// Only groups with fewer originals than this are requested.
  std::size_t target_size = 5;
};

/// Requests variants for every original answer of every group that needs
/// augmentation, in dataset order.
std::vector<RewriteSet> fetch_paraphrases(const corpus::Dataset& dataset,
                                          const CompletionFn& complete,
                                          const FetchOptions& options = {});

}  // namespace hsprobe::augment
