#include "hsprobe/layerscan.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "hsprobe/error.hpp"

namespace hsprobe::layerscan {
namespace {

using nlohmann::json;

std::size_t checked(std::size_t index, std::size_t lo, std::size_t hi) {
  if (index < lo || index > hi) {
    throw std::logic_error("layer index " + std::to_string(index) + " outside " +
                           std::to_string(lo) + ".." + std::to_string(hi));
  }
  return index;
}

// 1-based position of the first maximum (or minimum).
template <typename Better>
std::size_t arg_best(std::span<const double> v, Better better) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (better(v[i], v[best])) best = i;
  }
  return best + 1;
}

LayerCriterionResult finish(Criterion c, bool source, bool target,
                            std::vector<std::size_t> indices) {
  LayerCriterionResult r{c, source, target, std::move(indices), {}};
  if (!r.indices.empty()) r.summary = mode_freq(r.indices);
  return r;
}

const char* label_name(bool label) { return label ? "true" : "false"; }

}  // namespace

std::size_t min_abs(std::span<const double> series) {
  if (series.empty()) throw DomainError("min_abs of an empty series");
  return checked(arg_best(series, [](double a, double b) { return a < b; }), 1,
                 series.size());
}

DiffIndices layer_diffs(std::span<const double> series) {
  if (series.size() < 2) throw DomainError("layer differences need at least 2 layers");
  std::vector<double> steps(series.size() - 1);
  for (std::size_t l = 1; l < series.size(); ++l) steps[l - 1] = series[l] - series[l - 1];
  DiffIndices d;
  d.pos_dif = arg_best(steps, [](double a, double b) { return a > b; }) + 1;
  d.neg_dif = arg_best(steps, [](double a, double b) { return a < b; }) + 1;
  checked(d.pos_dif, 2, series.size());
  checked(d.neg_dif, 2, series.size());
  return d;
}

std::vector<double> group_dif_profile(const simkit::SimilarityMatrix& to_false,
                                      const simkit::SimilarityMatrix& to_true,
                                      Side side) {
  if (to_false.layers != to_true.layers || to_false.rows != to_true.rows) {
    throw ValidationError("group_dif on inconsistent matrices");
  }
  const bool label = side == Side::kTrue;
  const auto& other = label ? to_false : to_true;
  const auto& own = label ? to_true : to_false;
  const auto other_means = simkit::column_means(other, label);
  const auto own_means = simkit::column_means(own, label);
  std::vector<double> g(other_means.size());
  for (std::size_t l = 0; l < g.size(); ++l) g[l] = other_means[l] - own_means[l];
  return g;
}

std::size_t group_dif(const simkit::SimilarityMatrix& to_false,
                      const simkit::SimilarityMatrix& to_true, Side side,
                      DifSign sign) {
  auto g = group_dif_profile(to_false, to_true, side);
  if (g.empty()) throw DomainError("group_dif on a matrix without layers");
  if (sign == DifSign::kAbsolute) {
    for (auto& v : g) v = std::fabs(v);
  }
  return checked(arg_best(g, [](double a, double b) { return a > b; }), 1, g.size());
}

ModeFreq mode_freq(std::span<const std::size_t> indices) {
  if (indices.empty()) throw DomainError("mode of an empty index list");
  std::map<std::size_t, std::size_t> counts;
  for (auto i : indices) ++counts[i];
  ModeFreq best{};
  for (const auto& [index, count] : counts) {
    if (count > best.freq) best = {index, count};
  }
  return best;
}

Occurrence layer_occurrence(std::span<const std::size_t> indices, std::size_t first,
                            std::size_t last) {
  if (first < 1 || last < first) throw DomainError("invalid layer range");
  Occurrence o{first, last, std::vector<std::size_t>(last - first + 1, 0), 0};
  for (auto i : indices) {
    if (i >= first && i <= last) {
      ++o.counts[i - first];
    } else {
      ++o.other;
    }
  }
  return o;
}

std::string to_string(Criterion c) {
  switch (c) {
    case Criterion::kMinAbs: return "min_abs";
    case Criterion::kPosDif: return "pos_dif";
    case Criterion::kNegDif: return "neg_dif";
    case Criterion::kGroupDif: return "group_dif";
  }
  return "unknown";
}

ScanResult scan_layers(const simkit::AnalysisResult& analysis, const ScanOptions& options) {
  ScanResult r;
  r.model_name = analysis.model_name;
  r.layers = analysis.layers;
  r.options = options;
  if (analysis.pairs.empty()) throw InsufficientDataError("layer scan of zero pairs");
  if (options.occurrence_last > analysis.layers) {
    throw ValidationError("occurrence range ends past layer " +
                          std::to_string(analysis.layers));
  }

  // (source, target): opposite-group series first, then own-group.
  const std::pair<bool, bool> combos[] = {{false, true}, {true, false},
                                          {false, false}, {true, true}};
  const bool diffs = analysis.layers >= 2;
  for (const auto& [source, target] : combos) {
    std::vector<std::size_t> mins, pos, neg;
    std::size_t expected = 0;
    for (const auto& pair : analysis.pairs) {
      const auto& m = target ? pair.to_true : pair.to_false;
      for (std::size_t row = 0; row < m.rows.size(); ++row) {
        if (m.rows[row].label != source) continue;
        ++expected;
        const auto series = m.row(row);
        mins.push_back(min_abs(series));
        if (diffs) {
          const auto d = layer_diffs(series);
          pos.push_back(d.pos_dif);
          neg.push_back(d.neg_dif);
        }
      }
    }
    if (mins.size() != expected || (diffs && pos.size() != expected)) {
      throw std::logic_error("criterion population size mismatch");
    }
    r.sequence_criteria.push_back(finish(Criterion::kMinAbs, source, target, std::move(mins)));
    if (diffs) {
      r.sequence_criteria.push_back(finish(Criterion::kPosDif, source, target, std::move(pos)));
      r.sequence_criteria.push_back(finish(Criterion::kNegDif, source, target, std::move(neg)));
    }
  }

  for (Side side : {Side::kFalse, Side::kTrue}) {
    const bool label = side == Side::kTrue;
    std::vector<std::size_t> indices;
    auto& maxima = label ? r.maxima_true : r.maxima_false;
    for (const auto& pair : analysis.pairs) {
      const auto g = group_dif_profile(pair.to_false, pair.to_true, side);
      const auto layer = group_dif(pair.to_false, pair.to_true, side, options.sign);
      indices.push_back(layer);
      maxima.push_back({pair.to_false.pair_id, layer, g[layer - 1]});
    }
    if (indices.size() != analysis.pairs.size()) {
      throw std::logic_error("group_dif population size mismatch");
    }
    auto& occurrence = label ? r.occurrence_true : r.occurrence_false;
    occurrence = layer_occurrence(indices, options.occurrence_first, options.occurrence_last);
    auto& result = label ? r.group_dif_true : r.group_dif_false;
    result = finish(Criterion::kGroupDif, label, !label, std::move(indices));
  }
  return r;
}

json to_json(const LayerCriterionResult& r) {
  return {{"criterion", to_string(r.criterion)},
          {"source", label_name(r.source_label)},
          {"target", label_name(r.target_label)},
          {"mode", r.summary.mode},
          {"freq", r.summary.freq},
          {"count", r.indices.size()},
          {"indices", r.indices}};
}

json to_json(const Occurrence& o) {
  json counts = json::object();
  for (std::size_t l = o.first; l <= o.last; ++l) counts[std::to_string(l)] = o.counts[l - o.first];
  return {{"first", o.first}, {"last", o.last}, {"counts", std::move(counts)}, {"other", o.other}};
}

json to_json(const ScanResult& r) {
  json seq = json::array();
  for (const auto& c : r.sequence_criteria) seq.push_back(to_json(c));
  auto maxima = [](const std::vector<GroupDifMaximum>& v) {
    json out = json::array();
    for (const auto& m : v) out.push_back({{"pair_id", m.pair_id}, {"layer", m.layer}, {"value", m.value}});
    return out;
  };
  return {{"model_name", r.model_name},
          {"layers", r.layers},
          {"group_dif_sign", r.options.sign == DifSign::kSigned ? "signed" : "absolute"},
          {"sequence_criteria", std::move(seq)},
          {"group_dif",
           {{"false", to_json(r.group_dif_false)}, {"true", to_json(r.group_dif_true)}}},
          {"group_dif_maxima",
           {{"false", maxima(r.maxima_false)}, {"true", maxima(r.maxima_true)}}},
          {"occurrence",
           {{"false", to_json(r.occurrence_false)}, {"true", to_json(r.occurrence_true)}}}};
}

}  // namespace hsprobe::layerscan
