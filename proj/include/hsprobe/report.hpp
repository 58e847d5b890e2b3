#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "hsprobe/corpus.hpp"
#include "hsprobe/layerscan.hpp"
#include "hsprobe/simkit.hpp"
#include "hsprobe/stats.hpp"
#include "json.hpp"

namespace hsprobe::report {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  /// "#RRGGBB" or "RRGGBB".
  static Rgb parse(std::string_view hex);
  std::string hex() const;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

/// Linear interpolation, t clamped to [0, 1], channels rounded half up.
Rgb lerp(const Rgb& low, const Rgb& high, double t);

enum class Output { kHeatmaps, kFig5Sheet, kHistogram, kGroupDifCharts, kTables };

std::string to_string(Output o);
Output output_from_string(std::string_view s);

struct ReportRequest {
  std::filesystem::path run_dir;
  std::set<Output> outputs{Output::kHeatmaps, Output::kFig5Sheet,
                           Output::kHistogram, Output::kGroupDifCharts,
                           Output::kTables};
  Rgb ramp_low{255, 255, 255};
  Rgb ramp_high{8, 69, 148};

  void validate() const;
};

/// Full-precision, round-trippable decimal.
std::string format_number(double v);

/// Header "label,layer_1..layer_L", one row per answer.
std::string heatmap_csv(const simkit::SimilarityMatrix& matrix);

struct HeatmapSvg {
  std::string svg;
  /// All values equal; every cell uses the mid-ramp color.
  bool degenerate_range = false;
};

HeatmapSvg heatmap_svg(const simkit::SimilarityMatrix& matrix, const Rgb& low,
                       const Rgb& high);

/// Per-answer rows for both target groups, then the per-layer group means and
/// the layer-averaged scalar in the trailing column.
std::string fig5_csv(const simkit::PairAnalysis& pair);

std::string histogram_csv(const simkit::AnalysisResult& analysis);
std::string histogram_svg(const simkit::AnalysisResult& analysis, const Rgb& color);

std::string table5_csv(const simkit::AnalysisResult& analysis);
std::string table6_csv(const std::string& model_name,
                       const std::vector<stats::TestReport>& reports);
std::string table7_csv(const layerscan::ScanResult& scan);
std::string appendix_e_csv(const layerscan::ScanResult& scan);
std::string group_dif_maxima_csv(const layerscan::ScanResult& scan);
std::string occurrence_csv(const layerscan::ScanResult& scan);
std::string group_dif_svg(const layerscan::ScanResult& scan, const Rgb& color);

/// Corpus tables (average lengths and intra-group ROUGE-1).
std::string corpus_table_csv(const corpus::CorpusStats& stats);

stats::TestReport test_report_from_json(const nlohmann::json& j);
layerscan::ScanResult scan_from_json(const nlohmann::json& j);
corpus::CorpusStats corpus_stats_from_json(const nlohmann::json& j);

/// Renders the requested outputs under <run>/reports and writes
/// report_manifest.json. Throws DependencyError naming a missing stage.
nlohmann::json render_report(const ReportRequest& request);

}  // namespace hsprobe::report
