#include "hsprobe/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "hsprobe/error.hpp"
#include "hsprobe/run.hpp"

namespace hsprobe::report {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kCell = 18;
constexpr int kLeft = 48;
constexpr int kTop = 28;

std::string safe_name(std::string_view id) {
  std::string out(id);
  for (auto& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double json_number(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw FormatError("unexpected numeric string '" + s + "'");
  }
  return v.get<double>();
}

// Simple vertical bar chart.
std::string bar_chart_svg(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<std::size_t>& counts, const Rgb& color) {
  const int bar = 24, height = 160, left = 40, top = 30;
  const int width = left + bar * static_cast<int>(counts.size()) + 20;
  const std::size_t peak = counts.empty() ? 0 : *std::max_element(counts.begin(), counts.end());
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << top + height + 40 << "\">\n";
  svg << "<text x=\"" << left << "\" y=\"18\" font-size=\"12\">" << xml_escape(title) << "</text>\n";
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const int h = peak == 0 ? 0 : static_cast<int>(std::lround(
        static_cast<double>(height) * static_cast<double>(counts[i]) / static_cast<double>(peak)));
    const int x = left + bar * static_cast<int>(i);
    svg << "<rect class=\"bar\" x=\"" << x + 2 << "\" y=\"" << top + height - h << "\" width=\""
        << bar - 4 << "\" height=\"" << h << "\" fill=\"" << color.hex() << "\"><title>"
        << xml_escape(labels[i]) << ": " << counts[i] << "</title></rect>\n";
    svg << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + height + 14
        << "\" font-size=\"9\" text-anchor=\"middle\">" << xml_escape(labels[i]) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

Rgb Rgb::parse(std::string_view hex) {
  if (!hex.empty() && hex.front() == '#') hex.remove_prefix(1);
  if (hex.size() != 6) throw ValidationError("color must be RRGGBB");
  Rgb c;
  std::uint8_t* channels[] = {&c.r, &c.g, &c.b};
  for (int i = 0; i < 3; ++i) {
    unsigned v = 0;
    const auto part = hex.substr(static_cast<std::size_t>(2 * i), 2);
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + 2, v, 16);
    if (ec != std::errc() || ptr != part.data() + 2) {
      throw ValidationError("invalid color '" + std::string(hex) + "'");
    }
    *channels[i] = static_cast<std::uint8_t>(v);
  }
  return c;
}

std::string Rgb::hex() const {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

Rgb lerp(const Rgb& low, const Rgb& high, double t) {
  t = std::clamp(t, 0.0, 1.0);
  auto mix = [t](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::floor(a + (b - a) * t + 0.5));
  };
  return {mix(low.r, high.r), mix(low.g, high.g), mix(low.b, high.b)};
}

std::string to_string(Output o) {
  switch (o) {
    case Output::kHeatmaps: return "heatmaps";
    case Output::kFig5Sheet: return "fig5_sheet";
    case Output::kHistogram: return "histogram";
    case Output::kGroupDifCharts: return "group_dif_charts";
    case Output::kTables: return "tables";
  }
  return "unknown";
}

Output output_from_string(std::string_view s) {
  for (Output o : {Output::kHeatmaps, Output::kFig5Sheet, Output::kHistogram,
                   Output::kGroupDifCharts, Output::kTables}) {
    if (to_string(o) == s) return o;
  }
  throw ValidationError("unknown report output '" + std::string(s) + "'");
}

void ReportRequest::validate() const {
  if (outputs.empty()) throw ValidationError("no report outputs requested");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string heatmap_csv(const simkit::SimilarityMatrix& m) {
  std::string out = "label";
  for (std::size_t l = 1; l <= m.layers; ++l) out += ",layer_" + std::to_string(l);
  out += '\n';
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    out += m.rows[r].label ? '1' : '0';
    for (double v : m.row(r)) out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

HeatmapSvg heatmap_svg(const simkit::SimilarityMatrix& m, const Rgb& low, const Rgb& high) {
  HeatmapSvg out;
  double lo = 0.0, hi = 0.0;
  if (!m.values.empty()) {
    const auto [a, b] = std::minmax_element(m.values.begin(), m.values.end());
    lo = *a;
    hi = *b;
  }
  out.degenerate_range = !(hi > lo);
  const int width = kLeft + kCell * static_cast<int>(m.layers) + 8;
  const int height = kTop + kCell * static_cast<int>(m.rows.size()) + 8;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << height << "\">\n";
  svg << "<desc>pair " << xml_escape(m.pair_id) << ", similarity to the "
      << (m.target_label ? "true" : "false") << " group; range [" << format_number(lo)
      << ", " << format_number(hi) << "]"
      << (out.degenerate_range ? "; degenerate range, mid-ramp fill" : "") << "</desc>\n";
  for (std::size_t l = 0; l < m.layers; ++l) {
    svg << "<text class=\"layer-label\" x=\"" << kLeft + kCell * static_cast<int>(l) + kCell / 2
        << "\" y=\"" << kTop - 8 << "\" font-size=\"8\" text-anchor=\"middle\">" << l + 1
        << "</text>\n";
  }
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    const int y = kTop + kCell * static_cast<int>(r);
    svg << "<text class=\"row-label\" x=\"" << kLeft - 8 << "\" y=\"" << y + kCell - 5
        << "\" font-size=\"10\" text-anchor=\"end\">" << (m.rows[r].label ? 1 : 0)
        << "</text>\n";
    for (std::size_t l = 0; l < m.layers; ++l) {
      const double v = m.at(r, l);
      const double t = out.degenerate_range ? 0.5 : (v - lo) / (hi - lo);
      svg << "<rect class=\"cell\" x=\"" << kLeft + kCell * static_cast<int>(l) << "\" y=\""
          << y << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\""
          << lerp(low, high, t).hex() << "\"><title>" << format_number(v)
          << "</title></rect>\n";
    }
  }
  svg << "</svg>\n";
  out.svg = svg.str();
  return out;
}

std::string fig5_csv(const simkit::PairAnalysis& pair) {
  const std::size_t L = pair.to_true.layers;
  std::string out = "section,label,answer_index";
  for (std::size_t l = 1; l <= L; ++l) out += ",layer_" + std::to_string(l);
  out += ",layer_mean\n";
  for (const auto* m : {&pair.to_true, &pair.to_false}) {
    const std::string target = m->target_label ? "to_true" : "to_false";
    for (std::size_t r = 0; r < m->rows.size(); ++r) {
      out += target + "," + (m->rows[r].label ? "1" : "0") + "," +
             std::to_string(m->rows[r].answer_index);
      for (double v : m->row(r)) out += "," + format_number(v);
      out += ",\n";
    }
    for (bool source : {false, true}) {
      const auto cols = simkit::column_means(*m, source);
      double scalar = 0.0;
      for (double c : cols) scalar += c;
      scalar /= static_cast<double>(cols.size());
      out += target + "_mean," + (source ? "1" : "0") + ",";
      for (double c : cols) out += "," + format_number(c);
      out += "," + format_number(scalar) + "\n";
    }
  }
  return out;
}

std::string histogram_csv(const simkit::AnalysisResult& a) {
  std::string out = "category,bin,lower,upper,count\n";
  const std::pair<const char*, const simkit::Histogram*> hs[] = {
      {"own_true", &a.own_true_hist}, {"cross", &a.cross_hist}, {"own_false", &a.own_false_hist}};
  for (const auto& [name, h] : hs) {
    for (std::size_t k = 0; k < h->counts.size(); ++k) {
      out += std::string(name) + "," + std::to_string(k) + "," + format_number(h->edges[k]) +
             "," + format_number(h->edges[k + 1]) + "," + std::to_string(h->counts[k]) + "\n";
    }
  }
  return out;
}

std::string histogram_svg(const simkit::AnalysisResult& a, const Rgb& color) {
  const std::pair<const char*, const simkit::Histogram*> hs[] = {
      {"own_true", &a.own_true_hist}, {"cross", &a.cross_hist}, {"own_false", &a.own_false_hist}};
  std::ostringstream svg;
  const int panel_w = 360, panel_h = 220;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << panel_w * 3 << "\" height=\""
      << panel_h << "\">\n";
  int offset = 0;
  for (const auto& [name, h] : hs) {
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < h->counts.size(); ++k) labels.push_back(format_number(h->edges[k]));
    svg << "<g transform=\"translate(" << offset << ",0)\">\n"
        << bar_chart_svg(std::string(name) + " (" + a.model_name + ")", labels, h->counts, color)
        << "</g>\n";
    offset += panel_w;
  }
  svg << "</svg>\n";
  return svg.str();
}

std::string table5_csv(const simkit::AnalysisResult& a) {
  const auto& c = a.categories;
  std::string out = "category," + a.model_name + "\n";
  out += "true sequences to their own group," + format_number(c.own_true) + "\n";
  out += "true (false) sequences to the other group," + format_number(c.cross) + "\n";
  out += "false sequences to their own group," + format_number(c.own_false) + "\n";
  return out;
}

std::string table6_csv(const std::string& model, const std::vector<stats::TestReport>& reports) {
  std::string out =
      "hypothesis,model,p_value,chosen_test,t,df,levene_w,levene_p,equal_variances,"
      "normality_a_p,normality_b_p,reject_at_headline\n";
  for (const auto& r : reports) {
    out += "\"" + r.description + "\"," + model + "," + format_number(r.test.p) + "," +
           stats::to_string(r.chosen_test) + "," + format_number(r.test.t) + "," +
           format_number(r.test.df) + "," + format_number(r.levene.statistic) + "," +
           format_number(r.levene.p) + "," + (r.levene.equal_variances ? "1" : "0") + "," +
           format_number(r.normality_a.p) + "," + format_number(r.normality_b.p) + "," +
           (r.reject_at_headline ? "1" : "0") + "\n";
  }
  return out;
}

std::string table7_csv(const layerscan::ScanResult& s) {
  return "model,false_mode,false_freq,true_mode,true_freq\n" + s.model_name + "," +
         std::to_string(s.group_dif_false.summary.mode) + "," +
         std::to_string(s.group_dif_false.summary.freq) + "," +
         std::to_string(s.group_dif_true.summary.mode) + "," +
         std::to_string(s.group_dif_true.summary.freq) + "\n";
}

std::string appendix_e_csv(const layerscan::ScanResult& s) {
  std::string out =
      "model,sequences,group,min_abs_mode,min_abs_freq,pos_dif_mode,pos_dif_freq,"
      "neg_dif_mode,neg_dif_freq,count\n";
  const std::pair<bool, bool> combos[] = {{false, true}, {true, false}, {false, false}, {true, true}};
  for (const auto& [source, target] : combos) {
    std::string row = s.model_name + "," + (source ? "true" : "false") + "," +
                      (target ? "true" : "false");
    std::size_t count = 0;
    for (auto c : {layerscan::Criterion::kMinAbs, layerscan::Criterion::kPosDif,
                   layerscan::Criterion::kNegDif}) {
      auto it = std::find_if(s.sequence_criteria.begin(), s.sequence_criteria.end(),
                             [&](const auto& r) {
                               return r.criterion == c && r.source_label == source &&
                                      r.target_label == target;
                             });
      if (it == s.sequence_criteria.end()) {
        row += ",,";
      } else {
        row += "," + std::to_string(it->summary.mode) + "," + std::to_string(it->summary.freq);
        count = it->indices.size();
      }
    }
    out += row + "," + std::to_string(count) + "\n";
  }
  return out;
}

std::string group_dif_maxima_csv(const layerscan::ScanResult& s) {
  std::string out = "side,pair_id,layer,value\n";
  for (const auto* v : {&s.maxima_false, &s.maxima_true}) {
    const char* side = v == &s.maxima_false ? "false" : "true";
    for (const auto& m : *v) {
      out += std::string(side) + "," + m.pair_id + "," + std::to_string(m.layer) + "," +
             format_number(m.value) + "\n";
    }
  }
  return out;
}

std::string occurrence_csv(const layerscan::ScanResult& s) {
  std::string out = "side,layer,count\n";
  for (const auto* o : {&s.occurrence_false, &s.occurrence_true}) {
    const char* side = o == &s.occurrence_false ? "false" : "true";
    for (std::size_t l = o->first; l <= o->last; ++l) {
      out += std::string(side) + "," + std::to_string(l) + "," +
             std::to_string(o->counts[l - o->first]) + "\n";
    }
    out += std::string(side) + ",other," + std::to_string(o->other) + "\n";
  }
  return out;
}

std::string group_dif_svg(const layerscan::ScanResult& s, const Rgb& color) {
  std::ostringstream svg;
  std::string panels[2];
  int width = 0;
  for (int k = 0; k < 2; ++k) {
    const auto& o = k == 0 ? s.occurrence_false : s.occurrence_true;
    std::vector<std::string> labels;
    std::vector<std::size_t> counts = o.counts;
    for (std::size_t l = o.first; l <= o.last; ++l) labels.push_back(std::to_string(l));
    labels.push_back("other");
    counts.push_back(o.other);
    panels[k] = bar_chart_svg(std::string("group_dif, ") + (k == 0 ? "false" : "true") +
                                  " sequences (" + s.model_name + ")",
                              labels, counts, color);
    width = std::max(width, 40 + 24 * static_cast<int>(counts.size()) + 20);
  }
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width * 2 << "\" height=\"230\">\n"
      << "<g>\n" << panels[0] << "</g>\n<g transform=\"translate(" << width << ",0)\">\n"
      << panels[1] << "</g>\n</svg>\n";
  return svg.str();
}

std::string corpus_table_csv(const corpus::CorpusStats& s) {
  return "avg_text_len,true_avg_len,true_rouge1,false_avg_len,false_rouge1,examples,pairs\n" +
         format_number(s.avg_text_len) + "," + format_number(s.true_group.avg_answer_len) + "," +
         format_number(s.true_group.intra_group_rouge1) + "," +
         format_number(s.false_group.avg_answer_len) + "," +
         format_number(s.false_group.intra_group_rouge1) + "," + std::to_string(s.examples) +
         "," + std::to_string(s.pairs) + "\n";
}

stats::TestReport test_report_from_json(const json& j) {
  stats::TestReport r;
  try {
    r.description = j.at("description").get<std::string>();
    auto normality = [](const json& n) {
      stats::NormalityResult x;
      x.statistic = json_number(n.at("statistic"));
      x.p = n.at("p").get<double>();
      x.pass = n.at("pass").get<bool>();
      x.skewness = n.at("skewness").get<double>();
      x.excess_kurtosis = n.at("excess_kurtosis").get<double>();
      x.degenerate = n.at("degenerate").get<bool>();
      x.small_sample = n.at("small_sample").get<bool>();
      return x;
    };
    r.normality_a = normality(j.at("normality").at("a"));
    r.normality_b = normality(j.at("normality").at("b"));
    const auto& lv = j.at("levene");
    r.levene = {json_number(lv.at("statistic")), lv.at("p").get<double>(),
                lv.at("df1").get<double>(), lv.at("df2").get<double>(),
                lv.at("equal_variances").get<bool>(), lv.at("degenerate").get<bool>()};
    const auto chosen = j.at("chosen_test").get<std::string>();
    r.chosen_test = chosen == "welch"    ? stats::TTestVariant::kWelch
                    : chosen == "paired" ? stats::TTestVariant::kPaired
                                         : stats::TTestVariant::kStudent;
    const auto& t = j.at("t_test");
    r.test = {json_number(t.at("t")), t.at("df").get<double>(), t.at("p").get<double>(),
              t.at("degenerate").get<bool>()};
    r.alpha = j.at("alpha").get<double>();
    r.headline_alpha = j.at("headline_alpha").get<double>();
    r.reject_at_alpha = j.at("reject_at_alpha").get<bool>();
    r.reject_at_headline = j.at("reject_at_headline").get<bool>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed test report: ") + e.what());
  }
  return r;
}

layerscan::ScanResult scan_from_json(const json& j) {
  layerscan::ScanResult s;
  auto criterion = [](const json& c) {
    layerscan::LayerCriterionResult r;
    const auto name = c.at("criterion").get<std::string>();
    for (auto k : {layerscan::Criterion::kMinAbs, layerscan::Criterion::kPosDif,
                   layerscan::Criterion::kNegDif, layerscan::Criterion::kGroupDif}) {
      if (layerscan::to_string(k) == name) r.criterion = k;
    }
    r.source_label = c.at("source").get<std::string>() == "true";
    r.target_label = c.at("target").get<std::string>() == "true";
    r.indices = c.at("indices").get<std::vector<std::size_t>>();
    r.summary = {c.at("mode").get<std::size_t>(), c.at("freq").get<std::size_t>()};
    return r;
  };
  auto occurrence = [](const json& o) {
    layerscan::Occurrence x;
    x.first = o.at("first").get<std::size_t>();
    x.last = o.at("last").get<std::size_t>();
    for (std::size_t l = x.first; l <= x.last; ++l) {
      x.counts.push_back(o.at("counts").at(std::to_string(l)).get<std::size_t>());
    }
    x.other = o.at("other").get<std::size_t>();
    return x;
  };
  auto maxima = [](const json& v) {
    std::vector<layerscan::GroupDifMaximum> out;
    for (const auto& m : v) {
      out.push_back({m.at("pair_id").get<std::string>(), m.at("layer").get<std::size_t>(),
                     m.at("value").get<double>()});
    }
    return out;
  };
  try {
    s.model_name = j.at("model_name").get<std::string>();
    s.layers = j.at("layers").get<std::size_t>();
    s.options.sign = j.at("group_dif_sign").get<std::string>() == "absolute"
                         ? layerscan::DifSign::kAbsolute
                         : layerscan::DifSign::kSigned;
    for (const auto& c : j.at("sequence_criteria")) s.sequence_criteria.push_back(criterion(c));
    s.group_dif_false = criterion(j.at("group_dif").at("false"));
    s.group_dif_true = criterion(j.at("group_dif").at("true"));
    s.maxima_false = maxima(j.at("group_dif_maxima").at("false"));
    s.maxima_true = maxima(j.at("group_dif_maxima").at("true"));
    s.occurrence_false = occurrence(j.at("occurrence").at("false"));
    s.occurrence_true = occurrence(j.at("occurrence").at("true"));
    s.options.occurrence_first = s.occurrence_false.first;
    s.options.occurrence_last = s.occurrence_false.last;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed layer scan: ") + e.what());
  }
  return s;
}

corpus::CorpusStats corpus_stats_from_json(const json& j) {
  corpus::CorpusStats s;
  try {
    s.examples = j.at("examples").get<std::size_t>();
    s.pairs = j.at("pairs").get<std::size_t>();
    s.answers = j.at("answers").get<std::size_t>();
    s.avg_text_len = j.at("avg_text_len").get<double>();
    auto group = [](const json& g) {
      return corpus::GroupStats{g.at("avg_answer_len").get<double>(),
                                g.at("intra_group_rouge1").get<double>(),
                                g.at("answers").get<std::size_t>(),
                                g.at("groups_scored").get<std::size_t>()};
    };
    s.true_group = group(j.at("true"));
    s.false_group = group(j.at("false"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed corpus statistics: ") + e.what());
  }
  return s;
}

json render_report(const ReportRequest& request) {
  request.validate();
  const fs::path analysis_path = request.run_dir / "analyze" / "similarity.json";
  const fs::path tests_path = request.run_dir / "test" / "test_report.json";
  const fs::path layers_path = request.run_dir / "layers" / "layerscan.json";
  const fs::path out_dir = request.run_dir / "reports";

  auto require = [](const fs::path& p, const char* stage) {
    if (!fs::exists(p)) {
      throw DependencyError(std::string("report needs the '") + stage + "' stage output " +
                            p.string());
    }
  };
  const auto& want = request.outputs;
  const bool need_analysis = want.contains(Output::kHeatmaps) || want.contains(Output::kFig5Sheet) ||
                             want.contains(Output::kHistogram) || want.contains(Output::kTables);
  const bool need_layers = want.contains(Output::kGroupDifCharts) || want.contains(Output::kTables);
  const bool need_tests = want.contains(Output::kTables);
  if (need_analysis) require(analysis_path, "analyze");
  if (need_tests) require(tests_path, "test");
  if (need_layers) require(layers_path, "layers");

  json inputs = json::array();
  auto note_input = [&](const fs::path& p) {
    inputs.push_back({{"path", fs::relative(p, request.run_dir).generic_string()},
                      {"sha256", run::sha256_file(p)}});
  };
  simkit::AnalysisResult analysis;
  layerscan::ScanResult scan;
  std::vector<stats::TestReport> tests;
  if (need_analysis) {
    note_input(analysis_path);
    analysis = simkit::analysis_from_json(run::read_json(analysis_path));
  }
  if (need_tests) {
    note_input(tests_path);
    const auto j = run::read_json(tests_path);
    for (const auto& r : j.at("reports")) tests.push_back(test_report_from_json(r));
  }
  if (need_layers) {
    note_input(layers_path);
    scan = scan_from_json(run::read_json(layers_path));
  }

  std::error_code ec;
  fs::remove_all(out_dir, ec);
  json notes = json::array();
  auto emit = [&](const std::string& rel, const std::string& body) {
    run::write_file(out_dir / rel, body);
  };

  if (want.contains(Output::kHeatmaps)) {
    for (const auto& p : analysis.pairs) {
      for (const auto* m : {&p.to_false, &p.to_true}) {
        const std::string stem = "heatmaps/" + safe_name(m->pair_id) +
                                 (m->target_label ? "_to_true" : "_to_false");
        const auto h = heatmap_svg(*m, request.ramp_low, request.ramp_high);
        emit(stem + ".svg", h.svg);
        emit(stem + ".csv", heatmap_csv(*m));
        if (h.degenerate_range) notes.push_back(stem + ".svg: degenerate range, mid-ramp fill");
      }
    }
  }
  if (want.contains(Output::kFig5Sheet)) {
    for (const auto& p : analysis.pairs) {
      emit("fig5/" + safe_name(p.averages.pair_id) + ".csv", fig5_csv(p));
    }
  }
  if (want.contains(Output::kHistogram)) {
    emit("histogram.svg", histogram_svg(analysis, request.ramp_high));
    emit("histogram.csv", histogram_csv(analysis));
  }
  if (want.contains(Output::kGroupDifCharts)) {
    emit("group_dif/maxima.csv", group_dif_maxima_csv(scan));
    emit("group_dif/occurrence.csv", occurrence_csv(scan));
    emit("group_dif/occurrence.svg", group_dif_svg(scan, request.ramp_high));
  }
  if (want.contains(Output::kTables)) {
    emit("tables/table5.csv", table5_csv(analysis));
    emit("tables/table6.csv", table6_csv(analysis.model_name, tests));
    emit("tables/table7.csv", table7_csv(scan));
    emit("tables/appendix_e.csv", appendix_e_csv(scan));
    for (const char* stage : {"prepare", "augment"}) {
      const fs::path p = request.run_dir / stage / "corpus_stats.json";
      if (!fs::exists(p)) continue;
      note_input(p);
      emit(std::string("tables/corpus_") + stage + ".csv",
           corpus_table_csv(corpus_stats_from_json(run::read_json(p))));
    }
  }

  json artifacts = json::array();
  for (const auto& f : run::list_files(out_dir)) {
    if (f == "report_manifest.json") continue;
    artifacts.push_back({{"path", f}, {"sha256", run::sha256_file(out_dir / f)}});
  }
  json requested = json::array();
  for (auto o : want) requested.push_back(to_string(o));
  json manifest = {{"outputs", std::move(requested)},
                   {"ramp", {request.ramp_low.hex(), request.ramp_high.hex()}},
                   {"inputs", std::move(inputs)},
                   {"artifacts", std::move(artifacts)},
                   {"notes", std::move(notes)}};
  run::write_json(out_dir / "report_manifest.json", manifest);
  return manifest;
}

}  // namespace hsprobe::report
