#include "hsprobe/simkit.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "hsprobe/error.hpp"
#include "hsprobe/parallel.hpp"

namespace hsprobe::simkit {
namespace {

using nlohmann::json;

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Per-layer means over `source_label` rows, then their mean across layers.
double cascade(const SimilarityMatrix& m, bool source_label) {
  const auto cols = column_means(m, source_label);
  return mean_of(cols);
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) {
  if (u.size() != v.size()) throw DomainError("cosine of vectors of different length");
  double dot = 0.0, uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double a = u[i], b = v[i];
    dot += a * b;
    uu += a * a;
    vv += b * b;
  }
  if (uu == 0.0 || vv == 0.0) throw DomainError("cosine of a zero vector");
  return std::clamp(dot / (std::sqrt(uu) * std::sqrt(vv)), -1.0, 1.0);
}

double seq_to_group(const bundle::SequenceStates& seq,
                    std::span<const bundle::SequenceStates* const> group,
                    std::size_t layer, bool exclude_self) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto* member : group) {
    if (exclude_self && member == &seq) continue;
    total += cosine(seq.row(layer), member->row(layer));
    ++n;
  }
  if (n == 0) throw DomainError("similarity to an empty group");
  return total / static_cast<double>(n);
}

SimilarityMatrix layer_matrix(const PairStates& pair, bool target_label,
                              bool exclude_self) {
  SimilarityMatrix m;
  m.pair_id = pair.pair_id;
  m.target_label = target_label;
  m.layers = pair.layers();

  std::vector<const bundle::SequenceStates*> target;
  for (std::size_t i = 0; i < pair.states.size(); ++i) {
    if (pair.labels[i] == target_label) target.push_back(&pair.states[i]);
  }
  if (target.empty()) {
    throw DomainError("pair " + pair.pair_id + " has no " +
                      (target_label ? "true" : "false") + " answers");
  }
  for (bool row_label : {false, true}) {
    for (std::size_t i = 0; i < pair.states.size(); ++i) {
      if (pair.labels[i] != row_label) continue;
      m.rows.push_back({pair.answer_indices[i], row_label});
      const bool skip_self = exclude_self && row_label == target_label;
      for (std::size_t l = 0; l < m.layers; ++l) {
        m.values.push_back(seq_to_group(pair.states[i], target, l, skip_self));
      }
    }
  }
  return m;
}

std::vector<double> column_means(const SimilarityMatrix& m, bool source_label) {
  std::vector<double> cols(m.layers, 0.0);
  std::size_t n = 0;
  for (std::size_t r = 0; r < m.rows.size(); ++r) {
    if (m.rows[r].label != source_label) continue;
    for (std::size_t l = 0; l < m.layers; ++l) cols[l] += m.at(r, l);
    ++n;
  }
  if (n == 0) {
    throw DomainError("pair " + m.pair_id + " has no " +
                      (source_label ? "true" : "false") + " rows");
  }
  for (auto& c : cols) c /= static_cast<double>(n);
  return cols;
}

PairAverages pair_averages(const SimilarityMatrix& to_false,
                           const SimilarityMatrix& to_true) {
  if (to_false.target_label || !to_true.target_label) {
    throw ValidationError("pair_averages expects the false-target matrix first");
  }
  if (to_false.pair_id != to_true.pair_id || to_false.layers != to_true.layers ||
      to_false.rows != to_true.rows) {
    throw ValidationError("pair_averages on inconsistent matrices");
  }
  PairAverages p;
  p.pair_id = to_false.pair_id;
  p.own_true = cascade(to_true, true);
  p.cross_true_to_false = cascade(to_false, true);
  p.cross_false_to_true = cascade(to_true, false);
  p.own_false = cascade(to_false, false);
  return p;
}

CategoryAverages category_means(std::span<const PairAverages> pairs) {
  if (pairs.empty()) throw DomainError("category means of zero pairs");
  CategoryAverages c;
  for (const auto& p : pairs) {
    c.own_true += p.own_true;
    c.cross += 0.5 * (p.cross_true_to_false + p.cross_false_to_true);
    c.own_false += p.own_false;
  }
  const auto n = static_cast<double>(pairs.size());
  c.own_true /= n;
  c.cross /= n;
  c.own_false /= n;
  c.n_pairs = pairs.size();
  return c;
}

Histogram similarity_histogram(std::span<const double> values, std::size_t bins) {
  if (bins < 1) throw DomainError("histogram needs at least one bin");
  if (values.empty()) throw DomainError("histogram of no values");
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  Histogram h;
  if (!(hi > lo)) {
    h.edges = {lo, hi};
    h.counts = {values.size()};
    return h;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  h.edges.resize(bins + 1);
  for (std::size_t k = 0; k <= bins; ++k) {
    h.edges[k] = k == bins ? hi : lo + width * static_cast<double>(k);
  }
  h.counts.assign(bins, 0);
  for (double v : values) {
    auto k = static_cast<std::size_t>(std::floor((v - lo) / width));
    k = std::min(k, bins - 1);
    ++h.counts[k];
  }
  return h;
}

PairAnalysis analyze_pair(const PairStates& pair, bool exclude_self) {
  PairAnalysis a;
  a.to_false = layer_matrix(pair, false, exclude_self);
  a.to_true = layer_matrix(pair, true, exclude_self);
  a.averages = pair_averages(a.to_false, a.to_true);
  return a;
}

std::vector<PairStates> collect_pairs(const bundle::BundleReader& reader,
                                      unsigned threads) {
  const auto& manifest = reader.manifest();
  std::vector<PairStates> pairs;
  std::map<std::string, std::size_t> slot;
  std::vector<std::vector<std::size_t>> entries_of;
  for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
    const auto& e = manifest.entries[i];
    auto [it, inserted] = slot.try_emplace(e.pair_id, pairs.size());
    if (inserted) {
      pairs.push_back({e.pair_id, {}, {}, {}});
      entries_of.emplace_back();
    }
    entries_of[it->second].push_back(i);
  }
  parallel_for(pairs.size(), threads, [&](std::size_t p) {
    auto ids = entries_of[p];
    std::sort(ids.begin(), ids.end(), [&](std::size_t x, std::size_t y) {
      return manifest.entries[x].answer_index < manifest.entries[y].answer_index;
    });
    for (std::size_t i : ids) {
      pairs[p].answer_indices.push_back(manifest.entries[i].answer_index);
      pairs[p].labels.push_back(manifest.entries[i].label);
      pairs[p].states.push_back(reader.states_at(i));
    }
  });
  return pairs;
}

AnalysisResult analyze(std::string model_name, std::span<const PairStates> pairs,
                       bool exclude_self, std::size_t bins, unsigned threads) {
  AnalysisResult r;
  r.model_name = std::move(model_name);
  r.exclude_self = exclude_self;
  r.layers = pairs.empty() ? 0 : pairs.front().layers();
  r.pairs.resize(pairs.size());
  parallel_for(pairs.size(), threads,
               [&](std::size_t i) { r.pairs[i] = analyze_pair(pairs[i], exclude_self); });

  std::vector<PairAverages> avgs;
  std::vector<double> own_true, cross, own_false;
  for (const auto& p : r.pairs) {
    avgs.push_back(p.averages);
    own_true.push_back(p.averages.own_true);
    cross.push_back(p.averages.cross_true_to_false);
    cross.push_back(p.averages.cross_false_to_true);
    own_false.push_back(p.averages.own_false);
  }
  r.categories = category_means(avgs);
  r.own_true_hist = similarity_histogram(own_true, bins);
  r.cross_hist = similarity_histogram(cross, bins);
  r.own_false_hist = similarity_histogram(own_false, bins);
  return r;
}

json to_json(const SimilarityMatrix& m) {
  json rows = json::array();
  for (const auto& row : m.rows) rows.push_back({row.answer_index, row.label ? 1 : 0});
  return {{"pair_id", m.pair_id},
          {"target_label", m.target_label ? 1 : 0},
          {"layers", m.layers},
          {"rows", std::move(rows)},
          {"values", m.values}};
}

SimilarityMatrix matrix_from_json(const json& j) {
  SimilarityMatrix m;
  m.pair_id = j.at("pair_id").get<std::string>();
  m.target_label = j.at("target_label").get<int>() == 1;
  m.layers = j.at("layers").get<std::size_t>();
  for (const auto& row : j.at("rows")) {
    m.rows.push_back({row.at(0).get<std::size_t>(), row.at(1).get<int>() == 1});
  }
  m.values = j.at("values").get<std::vector<double>>();
  if (m.values.size() != m.rows.size() * m.layers) {
    throw FormatError("similarity matrix for " + m.pair_id + " has wrong size");
  }
  return m;
}

json to_json(const PairAverages& p) {
  return {{"pair_id", p.pair_id},
          {"own_true", p.own_true},
          {"cross_true_to_false", p.cross_true_to_false},
          {"cross_false_to_true", p.cross_false_to_true},
          {"own_false", p.own_false}};
}

json to_json(const CategoryAverages& c) {
  return {{"own_true", c.own_true},
          {"cross", c.cross},
          {"own_false", c.own_false},
          {"n_pairs", c.n_pairs}};
}

json to_json(const Histogram& h) { return {{"edges", h.edges}, {"counts", h.counts}}; }

json to_json(const AnalysisResult& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"averages", to_json(p.averages)},
                     {"to_false", to_json(p.to_false)},
                     {"to_true", to_json(p.to_true)}});
  }
  return {{"model_name", r.model_name},
          {"layers", r.layers},
          {"exclude_self", r.exclude_self},
          {"categories", to_json(r.categories)},
          {"histograms",
           {{"own_true", to_json(r.own_true_hist)},
            {"cross", to_json(r.cross_hist)},
            {"own_false", to_json(r.own_false_hist)}}},
          {"pairs", std::move(pairs)}};
}

AnalysisResult analysis_from_json(const json& j) {
  AnalysisResult r;
  try {
    r.model_name = j.at("model_name").get<std::string>();
    r.layers = j.at("layers").get<std::size_t>();
    r.exclude_self = j.at("exclude_self").get<bool>();
    const auto& c = j.at("categories");
    r.categories = {c.at("own_true").get<double>(), c.at("cross").get<double>(),
                    c.at("own_false").get<double>(), c.at("n_pairs").get<std::size_t>()};
    auto hist = [&](const char* key) {
      const auto& h = j.at("histograms").at(key);
      return Histogram{h.at("edges").get<std::vector<double>>(),
                       h.at("counts").get<std::vector<std::size_t>>()};
    };
    r.own_true_hist = hist("own_true");
    r.cross_hist = hist("cross");
    r.own_false_hist = hist("own_false");
    for (const auto& p : j.at("pairs")) {
      PairAnalysis a;
      a.to_false = matrix_from_json(p.at("to_false"));
      a.to_true = matrix_from_json(p.at("to_true"));
      const auto& av = p.at("averages");
      a.averages = {av.at("pair_id").get<std::string>(), av.at("own_true").get<double>(),
                    av.at("cross_true_to_false").get<double>(),
                    av.at("cross_false_to_true").get<double>(),
                    av.at("own_false").get<double>()};
      r.pairs.push_back(std::move(a));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed analysis file: ") + e.what());
  }
  return r;
}

}  // namespace hsprobe::simkit
