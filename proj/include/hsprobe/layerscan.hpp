#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hsprobe/simkit.hpp"
#include "json.hpp"

// Weak-layer criteria. All layer indices here are 1-based and ties resolve
// to the smallest index.
namespace hsprobe::layerscan {

struct LayerSeries {
  std::vector<double> values;
  std::string pair_id;
  std::size_t answer_index = 0;
  bool source_label = false;
  bool target_label = false;
};

/// Layer holding the minimum value.
std::size_t min_abs(std::span<const double> series);

struct DiffIndices {
  std::size_t pos_dif = 0;
  std::size_t neg_dif = 0;
};

/// Steps d[l] = v[l] - v[l-1]; each index names the later layer of its step.
DiffIndices layer_diffs(std::span<const double> series);

enum class Side { kTrue, kFalse };
enum class DifSign { kSigned, kAbsolute };

/// g[l] = mean over `side` answers of (similarity to the other group minus
/// similarity to their own group) at layer l.
std::vector<double> group_dif_profile(const simkit::SimilarityMatrix& to_false,
                                      const simkit::SimilarityMatrix& to_true,
                                      Side side);

std::size_t group_dif(const simkit::SimilarityMatrix& to_false,
                      const simkit::SimilarityMatrix& to_true, Side side,
                      DifSign sign = DifSign::kSigned);

struct ModeFreq {
  std::size_t mode = 0;
  std::size_t freq = 0;

  friend bool operator==(const ModeFreq&, const ModeFreq&) = default;
};

/// Throws DomainError on an empty list.
ModeFreq mode_freq(std::span<const std::size_t> indices);

struct Occurrence {
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<std::size_t> counts;  // last - first + 1
  std::size_t other = 0;
};

Occurrence layer_occurrence(std::span<const std::size_t> indices,
                            std::size_t first, std::size_t last);

enum class Criterion { kMinAbs, kPosDif, kNegDif, kGroupDif };

std::string to_string(Criterion c);

struct LayerCriterionResult {
  Criterion criterion = Criterion::kMinAbs;
  bool source_label = false;
  /// For group_dif this is the opposite of `source_label`.
  bool target_label = false;
  std::vector<std::size_t> indices;
  ModeFreq summary;
};

struct GroupDifMaximum {
  std::string pair_id;
  std::size_t layer = 0;
  double value = 0.0;
};

struct ScanOptions {
  DifSign sign = DifSign::kSigned;
  std::size_t occurrence_first = 9;
  std::size_t occurrence_last = 16;
};

struct ScanResult {
  std::string model_name;
  std::size_t layers = 0;
  /// min_abs, pos_dif, neg_dif for every (source, target) combination; the
  /// opposite-group rows come first.
  std::vector<LayerCriterionResult> sequence_criteria;
  LayerCriterionResult group_dif_false;
  LayerCriterionResult group_dif_true;
  std::vector<GroupDifMaximum> maxima_false;
  std::vector<GroupDifMaximum> maxima_true;
  Occurrence occurrence_false;
  Occurrence occurrence_true;
  ScanOptions options;
};

ScanResult scan_layers(const simkit::AnalysisResult& analysis,
                       const ScanOptions& options = {});

nlohmann::json to_json(const LayerCriterionResult& r);
nlohmann::json to_json(const Occurrence& o);
nlohmann::json to_json(const ScanResult& r);

}  // namespace hsprobe::layerscan
