#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "hsprobe/corpus.hpp"
#include "json.hpp"

namespace hsprobe::augment {

/// Lowercased, punctuation-stripped, whitespace-split unigrams.
std::vector<std::string> rouge_tokens(std::string_view s);

/// ROUGE-1 F1 over multiset unigram overlap. Throws DomainError when either
/// side has no tokens.
double rouge1(std::string_view candidate, std::string_view reference);

/// Three paraphrases of one answer of one group.
struct RewriteSet {
  std::string pair_id;
  bool label = false;
  /// Index into the pair's group of answers carrying `label`.
  std::size_t source_answer_index = 0;
  /// Optional; checked against the group when non-empty.
  std::string source_text;
  std::vector<std::string> variants;

  void validate() const;
};

struct RankedVariant {
  std::string text;
  double avg_rouge1 = 0.0;
  std::size_t source_answer_index = 0;
  std::size_t variant_position = 0;
};

/// Scores each variant by its mean ROUGE-1 against the original answers in
/// `group` and sorts ascending, ties broken by (source index, position).
std::vector<RankedVariant> rank_variants(
    const std::vector<corpus::Answer>& group,
    const std::vector<RewriteSet>& rewrites);

/// Appends the lowest-scoring variants until the group has `target_size`
/// members. `context` names the group in capacity errors.
std::vector<corpus::Answer> complete_group(
    const std::vector<corpus::Answer>& group,
    const std::vector<RankedVariant>& ranked, std::size_t target_size = 5,
    std::string_view context = {});

/// Drops pairs whose true/false mean answer lengths differ by more than
/// `max_len_diff_chars`, then examples left without pairs.
corpus::Dataset post_filter(const corpus::Dataset& dataset,
                            double max_len_diff_chars = 30.0);

enum class OversizePolicy { kError, kTruncate };

struct AugmentOptions {
  std::size_t target_size = 5;
  double max_len_diff_chars = 30.0;
  OversizePolicy oversize = OversizePolicy::kTruncate;
};

struct AugmentReport {
  std::size_t examples_in = 0;
  std::size_t pairs_in = 0;
  std::size_t variants_added = 0;
  std::size_t groups_truncated = 0;
  std::size_t examples_removed = 0;
  std::size_t pairs_removed = 0;
  std::size_t examples_out = 0;
  std::size_t pairs_out = 0;
};

/// rank -> complete -> post_filter over the whole dataset. Every group that
/// cannot reach the target size is listed in one CapacityError.
corpus::Dataset augment_dataset(const corpus::Dataset& dataset,
                                const std::vector<RewriteSet>& rewrites,
                                const AugmentOptions& options = {},
                                AugmentReport* report = nullptr);

std::vector<RewriteSet> rewrites_from_json(const nlohmann::json& j);
nlohmann::json to_json(const std::vector<RewriteSet>& rewrites);
std::vector<RewriteSet> load_rewrites(const std::filesystem::path& path);
nlohmann::json to_json(const AugmentReport& report);

}  // namespace hsprobe::augment
