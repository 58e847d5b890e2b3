#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace hsprobe::corpus {

enum class Origin { kOriginal, kRewritten };

std::string_view to_string(Origin origin);
Origin origin_from_string(std::string_view s);

struct Answer {
  std::string text;
  bool label = false;
  Origin origin = Origin::kOriginal;

  friend bool operator==(const Answer&, const Answer&) = default;
};

struct QAPair {
  std::string pair_id;
  std::string question;
  std::vector<Answer> answers;

  /// Answers carrying `label`, in dataset order.
  std::vector<Answer> group(bool label) const;
  /// Positions in `answers` of the answers carrying `label`.
  std::vector<std::size_t> group_indices(bool label) const;

  friend bool operator==(const QAPair&, const QAPair&) = default;
};

struct Example {
  std::int64_t idx = 0;
  std::string text;
  std::vector<QAPair> pairs;

  friend bool operator==(const Example&, const Example&) = default;
};

using Dataset = std::vector<Example>;

std::size_t count_pairs(const Dataset& dataset);
std::size_t count_answers(const Dataset& dataset);

enum class DatasetFormat { kAuto, kJsonl, kSingleJson };

struct ParseOptions {
  DatasetFormat format = DatasetFormat::kAuto;
  bool allow_unlabeled = false;
};

/// Reads MuSeRC-style records. Accepts "idx" or "id", and the text and
/// questions either at top level or under "passage". Answers without a label
/// are rejected unless `allow_unlabeled` is set (they are then read as false
/// and the dataset must not be passed to selection).
Dataset parse_dataset(std::istream& in, const ParseOptions& options = {});
Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& options = {});

/// Removes "(<digits>)" sentence markers and one following space, repeated
/// until none remain.
std::string normalize_text(std::string_view raw);

/// Applies normalize_text to every example text.
Dataset normalize_dataset(Dataset dataset);

struct SelectionCriteria {
  std::size_t min_true = 2;
  std::size_t min_false = 2;
  std::size_t min_words = 5;
  double max_len_diff_chars = 30.0;
  bool forbid_digits = true;

  void validate() const;
};

/// Mean character length of true answers minus that of false answers, in
/// absolute value. Zero if either group is empty.
double length_gap(const QAPair& pair);

/// Per-condition verdicts, index 0 = condition 1 (group sizes), 1 = word
/// count, 2 = length balance, 3 = digits.
std::array<bool, 4> violated_conditions(const QAPair& pair,
                                        const SelectionCriteria& criteria);

struct SelectionReport {
  std::size_t examples_in = 0;
  std::size_t pairs_in = 0;
  std::size_t examples_out = 0;
  std::size_t pairs_out = 0;
  std::size_t answers_out = 0;
  /// Rejections attributed to the first violated condition.
  std::array<std::size_t, 4> first_failure{};
  /// Pairs violating each condition (a pair may count more than once).
  std::array<std::size_t, 4> violations{};
};

Dataset select_pairs(const Dataset& dataset, const SelectionCriteria& criteria,
                     SelectionReport* report = nullptr);

struct GroupStats {
  double avg_answer_len = 0.0;
  double intra_group_rouge1 = 0.0;
  std::size_t answers = 0;
  /// Groups with at least two answers, i.e. those contributing to ROUGE.
  std::size_t groups_scored = 0;
};

struct CorpusStats {
  std::size_t examples = 0;
  std::size_t pairs = 0;
  std::size_t answers = 0;
  double avg_text_len = 0.0;
  GroupStats true_group;
  GroupStats false_group;
};

CorpusStats corpus_stats(const Dataset& dataset);

/// Mean pairwise ROUGE-1 F1 over unordered pairs of distinct answers.
double intra_group_rouge1(const std::vector<Answer>& group);

nlohmann::json to_json(const Dataset& dataset);
Dataset dataset_from_json(const nlohmann::json& j, const ParseOptions& options = {});
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);

nlohmann::json to_json(const SelectionCriteria& criteria);
nlohmann::json to_json(const SelectionReport& report);
nlohmann::json to_json(const CorpusStats& stats);

/// Locates a pair by id. Returns nullptr when absent.
const QAPair* find_pair(const Dataset& dataset, std::string_view pair_id);
/// The example owning `pair_id`, or nullptr.
const Example* find_example(const Dataset& dataset, std::string_view pair_id);

}  // namespace hsprobe::corpus
