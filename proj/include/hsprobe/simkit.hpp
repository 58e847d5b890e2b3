#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hsprobe/bundle.hpp"
#include "json.hpp"

namespace hsprobe::simkit {

/// u.v / (|u||v|) accumulated in double and clamped to [-1, 1]. Throws
/// DomainError for a zero vector or a length mismatch.
double cosine(std::span<const float> u, std::span<const float> v);

/// Mean cosine of `seq` to the members of `group` at `layer` (0-based). With
/// `exclude_self`, members at the same address as `seq` are skipped.
double seq_to_group(const bundle::SequenceStates& seq,
                    std::span<const bundle::SequenceStates* const> group,
                    std::size_t layer, bool exclude_self);

/// All answers of one question, in answer-index order.
struct PairStates {
  std::string pair_id;
  std::vector<std::size_t> answer_indices;
  std::vector<bool> labels;
  std::vector<bundle::SequenceStates> states;

  std::size_t layers() const { return states.empty() ? 0 : states.front().layers(); }
};

struct MatrixRow {
  std::size_t answer_index = 0;
  bool label = false;

  friend bool operator==(const MatrixRow&, const MatrixRow&) = default;
};

/// Rows are answers (false answers first, then true, each in answer order);
/// columns are layers.
struct SimilarityMatrix {
  std::string pair_id;
  bool target_label = false;
  std::size_t layers = 0;
  std::vector<MatrixRow> rows;
  std::vector<double> values;  // rows.size() x layers, row-major

  double at(std::size_t row, std::size_t layer) const {
    return values[row * layers + layer];
  }
  std::span<const double> row(std::size_t r) const {
    return {values.data() + r * layers, layers};
  }
};

SimilarityMatrix layer_matrix(const PairStates& pair, bool target_label,
                              bool exclude_self);

/// Per-layer mean over the rows with `source_label`.
std::vector<double> column_means(const SimilarityMatrix& matrix,
                                 bool source_label);

struct PairAverages {
  std::string pair_id;
  double own_true = 0.0;
  double cross_true_to_false = 0.0;
  double cross_false_to_true = 0.0;
  double own_false = 0.0;
};

/// Means over the answers of a label at every layer, then over layers.
PairAverages pair_averages(const SimilarityMatrix& to_false,
                           const SimilarityMatrix& to_true);

struct CategoryAverages {
  double own_true = 0.0;
  double cross = 0.0;
  double own_false = 0.0;
  std::size_t n_pairs = 0;
};

CategoryAverages category_means(std::span<const PairAverages> pairs);

struct Histogram {
  std::vector<double> edges;  // bins + 1
  std::vector<std::size_t> counts;
};

/// Equal-width bins over [min, max], the last bin closed. A zero-width range
/// yields a single bin holding everything.
Histogram similarity_histogram(std::span<const double> values, std::size_t bins);

struct PairAnalysis {
  SimilarityMatrix to_false;
  SimilarityMatrix to_true;
  PairAverages averages;
};

PairAnalysis analyze_pair(const PairStates& pair, bool exclude_self);

struct AnalysisResult {
  std::string model_name;
  std::size_t layers = 0;
  bool exclude_self = true;
  std::vector<PairAnalysis> pairs;
  CategoryAverages categories;
  Histogram own_true_hist;
  Histogram cross_hist;
  Histogram own_false_hist;
};

/// Groups bundle entries by pair (first-appearance order in the manifest)
/// and loads their states.
std::vector<PairStates> collect_pairs(const bundle::BundleReader& reader,
                                      unsigned threads = 1);

AnalysisResult analyze(std::string model_name,
                       std::span<const PairStates> pairs, bool exclude_self,
                       std::size_t bins = 20, unsigned threads = 1);

nlohmann::json to_json(const SimilarityMatrix& m);
SimilarityMatrix matrix_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PairAverages& p);
nlohmann::json to_json(const CategoryAverages& c);
nlohmann::json to_json(const Histogram& h);
nlohmann::json to_json(const AnalysisResult& r);
AnalysisResult analysis_from_json(const nlohmann::json& j);

}  // namespace hsprobe::simkit
