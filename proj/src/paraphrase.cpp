#include "hsprobe/paraphrase.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <thread>

#include "httplib.h"
#include "hsprobe/error.hpp"
#include "hsprobe/text.hpp"
#include "json.hpp"
#include "resources.hpp"

namespace hsprobe::augment {
namespace {

using nlohmann::json;

[[noreturn]] void format_failure(const std::string& why, std::string_view response) {
  throw FormatError("paraphrase response " + why + "; raw response:\n" +
                    std::string(response));
}

}  // namespace

std::string paraphrase_prompt(std::string_view answer) {
  const std::string_view t = resources::paraphrase_prompt;
  constexpr std::string_view field = "{answer}";
  const auto at = t.find(field);
  std::string out(t.substr(0, at));
  out.append(answer);
  out.append(t.substr(at + field.size()));
  return out;
}

std::array<std::string, 3> parse_rewrite_response(std::string_view response) {
  std::array<std::size_t, 3> starts{};
  for (std::size_t k = 0; k < 3; ++k) {
    const std::string marker = "#" + std::to_string(k + 1) + "#";
    const auto at = response.find(marker);
    if (at == std::string_view::npos) format_failure("lacks " + marker, response);
    if (response.find(marker, at + 1) != std::string_view::npos) {
      format_failure("repeats " + marker, response);
    }
    starts[k] = at;
  }
  std::array<std::string, 3> variants;
  for (std::size_t k = 0; k < 3; ++k) {
    std::size_t end = response.size();
    for (std::size_t other : starts) {
      if (other > starts[k]) end = std::min(end, other);
    }
    const auto body = response.substr(starts[k] + 3, end - starts[k] - 3);
    variants[k] = std::string(text::trim(body));
    if (variants[k].empty()) {
      format_failure("has an empty variant #" + std::to_string(k + 1) + "#", response);
    }
  }
  return variants;
}

CompletionFn http_completion(const EndpointConfig& config) {
  // Split "scheme://host[:port]/prefix" into the client origin and the path.
  const auto scheme_end = config.base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ValidationError("endpoint URL needs a scheme: " + config.base_url);
  }
  const auto path_start = config.base_url.find('/', scheme_end + 3);
  const std::string origin = config.base_url.substr(0, path_start);
  std::string path = path_start == std::string::npos
                         ? std::string()
                         : config.base_url.substr(path_start);
  while (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  std::optional<std::string> token;
  if (const char* t = std::getenv(config.token_env.c_str()); t != nullptr && *t) {
    token = t;
  }
  return [origin, path, token, model = config.model,
          timeout = config.timeout](const std::string& prompt) {
    httplib::Client client(origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers;
    if (token) headers.emplace("Authorization", "Bearer " + *token);
    const json body = {{"model", model},
                       {"messages", json::array({{{"role", "user"}, {"content", prompt}}})}};
    auto res = client.Post(path, headers, body.dump(), "application/json");
    if (!res) {
      throw TransportError("chat-completion request failed: " +
                           httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw TransportError("chat-completion endpoint returned HTTP " +
                           std::to_string(res->status));
    }
    try {
      const auto j = json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception& e) {
      throw FormatError(std::string("unexpected chat-completion body: ") + e.what());
    }
  };
}

std::vector<RewriteSet> fetch_paraphrases(const corpus::Dataset& dataset,
                                          const CompletionFn& complete,
                                          const FetchOptions& options) {
  std::vector<RewriteSet> out;
  std::optional<std::chrono::steady_clock::time_point> last_request;
  auto request = [&](const std::string& prompt) {
    if (last_request && options.min_interval.count() > 0) {
      std::this_thread::sleep_until(*last_request + options.min_interval);
    }
    last_request = std::chrono::steady_clock::now();
    return complete(prompt);
  };

  for (const auto& ex : dataset) {
    for (const auto& pair : ex.pairs) {
      for (bool label : {true, false}) {
        const auto group = pair.group(label);
        if (group.empty() || group.size() >= options.target_size) continue;
        for (std::size_t i = 0; i < group.size(); ++i) {
          if (group[i].origin != corpus::Origin::kOriginal) continue;
          const std::string prompt = paraphrase_prompt(group[i].text);
          for (int attempt = 0;; ++attempt) {
            const std::string response = request(prompt);
            try {
              const auto variants = parse_rewrite_response(response);
              out.push_back({pair.pair_id, label, i, group[i].text,
                             {variants.begin(), variants.end()}});
              break;
            } catch (const FormatError&) {
              if (attempt >= options.max_retries) throw;
            }
          }
        }
      }
    }
  }
  return out;
}

}  // namespace hsprobe::augment
