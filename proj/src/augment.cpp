#include "hsprobe/augment.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

#include "hsprobe/error.hpp"
#include "hsprobe/run.hpp"
#include "hsprobe/text.hpp"

namespace hsprobe::augment {
namespace {

using corpus::Answer;
using corpus::Dataset;
using nlohmann::json;

std::string group_name(std::string_view pair_id, bool label) {
  return std::string(pair_id) + (label ? "/true" : "/false");
}

}  // namespace

std::vector<std::string> rouge_tokens(std::string_view s) {
  std::vector<std::string> tokens;
  std::u32string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(text::encode_utf8(current));
    current.clear();
  };
  for (char32_t c : text::decode_utf8(s)) {
    if (text::is_space(c)) {
      flush();
    } else if (!text::is_punctuation(c)) {
      current.push_back(text::to_lower(c));
    }
  }
  flush();
  return tokens;
}

double rouge1(std::string_view candidate, std::string_view reference) {
  const auto cand = rouge_tokens(candidate);
  const auto ref = rouge_tokens(reference);
  if (cand.empty() || ref.empty()) {
    throw DomainError("ROUGE-1 of a text without tokens");
  }
  std::map<std::string_view, std::size_t> ref_counts;
  for (const auto& t : ref) ++ref_counts[t];
  std::size_t overlap = 0;
  for (const auto& t : cand) {
    auto it = ref_counts.find(t);
    if (it != ref_counts.end() && it->second > 0) {
      --it->second;
      ++overlap;
    }
  }
  if (overlap == 0) return 0.0;
  const double o = static_cast<double>(overlap);
  const double precision = o / static_cast<double>(cand.size());
  const double recall = o / static_cast<double>(ref.size());
  return 2.0 * precision * recall / (precision + recall);
}

void RewriteSet::validate() const {
  if (variants.size() != 3) {
    throw ValidationError("rewrite set for " + group_name(pair_id, label) +
                          " must have exactly 3 variants");
  }
  for (const auto& v : variants) {
    if (text::trim(v).empty()) {
      throw ValidationError("empty rewrite variant for " +
                            group_name(pair_id, label));
    }
  }
}

std::vector<RankedVariant> rank_variants(const std::vector<Answer>& group,
                                         const std::vector<RewriteSet>& rewrites) {
  std::vector<const Answer*> originals;
  for (const auto& a : group) {
    if (a.origin == corpus::Origin::kOriginal) originals.push_back(&a);
  }
  if (originals.empty()) throw DomainError("rank_variants on an empty group");

  std::vector<RankedVariant> ranked;
  for (const auto& rs : rewrites) {
    rs.validate();
    if (rs.source_answer_index >= group.size()) {
      throw ValidationError("rewrite source index " +
                            std::to_string(rs.source_answer_index) +
                            " outside group " + group_name(rs.pair_id, rs.label));
    }
    for (std::size_t pos = 0; pos < rs.variants.size(); ++pos) {
      double total = 0.0;
      for (const Answer* a : originals) total += rouge1(rs.variants[pos], a->text);
      ranked.push_back({rs.variants[pos],
                        total / static_cast<double>(originals.size()),
                        rs.source_answer_index, pos});
    }
  }
  std::sort(ranked.begin(), ranked.end(),
            [](const RankedVariant& x, const RankedVariant& y) {
              return std::tie(x.avg_rouge1, x.source_answer_index, x.variant_position) <
                     std::tie(y.avg_rouge1, y.source_answer_index, y.variant_position);
            });
  return ranked;
}

std::vector<Answer> complete_group(const std::vector<Answer>& group,
                                   const std::vector<RankedVariant>& ranked,
                                   std::size_t target_size,
                                   std::string_view context) {
  if (group.size() > target_size) {
    throw CapacityError("group " + std::string(context) + " has " +
                        std::to_string(group.size()) + " answers, more than " +
                        std::to_string(target_size));
  }
  const std::size_t missing = target_size - group.size();
  if (ranked.size() < missing) {
    throw CapacityError("group " + std::string(context) + " needs " +
                        std::to_string(missing) + " variants, has " +
                        std::to_string(ranked.size()));
  }
  std::vector<Answer> out = group;
  const bool label = group.empty() ? false : group.front().label;
  for (std::size_t i = 0; i < missing; ++i) {
    out.push_back({ranked[i].text, label, corpus::Origin::kRewritten});
  }
  return out;
}

Dataset post_filter(const Dataset& dataset, double max_len_diff_chars) {
  Dataset out;
  for (const auto& ex : dataset) {
    corpus::Example kept{ex.idx, ex.text, {}};
    for (const auto& pair : ex.pairs) {
      if (corpus::length_gap(pair) <= max_len_diff_chars) kept.pairs.push_back(pair);
    }
    if (!kept.pairs.empty()) out.push_back(std::move(kept));
  }
  return out;
}

Dataset augment_dataset(const Dataset& dataset,
                        const std::vector<RewriteSet>& rewrites,
                        const AugmentOptions& options, AugmentReport* report) {
  std::map<std::pair<std::string, bool>, std::vector<RewriteSet>> by_group;
  for (const auto& rs : rewrites) by_group[{rs.pair_id, rs.label}].push_back(rs);

  AugmentReport rep;
  rep.examples_in = dataset.size();
  rep.pairs_in = corpus::count_pairs(dataset);
  std::vector<std::string> starved;
  Dataset completed;
  for (const auto& ex : dataset) {
    corpus::Example out_ex{ex.idx, ex.text, {}};
    for (const auto& pair : ex.pairs) {
      corpus::QAPair out_pair{pair.pair_id, pair.question, {}};
      bool ok = true;
      for (bool label : {true, false}) {
        auto group = pair.group(label);
        if (group.size() > options.target_size) {
          if (options.oversize == OversizePolicy::kError) {
            throw CapacityError("group " + group_name(pair.pair_id, label) +
                                " exceeds the target size");
          }
          group.resize(options.target_size);
          ++rep.groups_truncated;
        }
        const std::string name = group_name(pair.pair_id, label);
        std::vector<RewriteSet> sets;
        if (auto it = by_group.find({pair.pair_id, label}); it != by_group.end()) {
          sets = it->second;
        }
        for (const auto& rs : sets) {
          if (rs.source_answer_index >= group.size()) {
            throw ValidationError("rewrite for " + name + " references answer " +
                                  std::to_string(rs.source_answer_index) +
                                  " of " + std::to_string(group.size()));
          }
          if (!rs.source_text.empty() &&
              rs.source_text != group[rs.source_answer_index].text) {
            throw ValidationError("rewrite for " + name +
                                  " does not match source answer " +
                                  std::to_string(rs.source_answer_index));
          }
        }
        const std::size_t missing = options.target_size - group.size();
        if (missing == 0) {
          for (auto& a : group) out_pair.answers.push_back(std::move(a));
          continue;
        }
        if (sets.size() * 3 < missing) {
          starved.push_back(name);
          ok = false;
          continue;
        }
        const auto ranked = rank_variants(group, sets);
        auto full = complete_group(group, ranked, options.target_size, name);
        rep.variants_added += missing;
        for (auto& a : full) out_pair.answers.push_back(std::move(a));
      }
      if (ok) out_ex.pairs.push_back(std::move(out_pair));
    }
    completed.push_back(std::move(out_ex));
  }
  if (!starved.empty()) {
    std::ostringstream msg;
    msg << "insufficient rewrite variants for " << starved.size() << " group(s):";
    for (const auto& s : starved) msg << ' ' << s;
    throw CapacityError(msg.str());
  }

  Dataset filtered = post_filter(completed, options.max_len_diff_chars);
  rep.examples_out = filtered.size();
  rep.pairs_out = corpus::count_pairs(filtered);
  rep.examples_removed = rep.examples_in - rep.examples_out;
  rep.pairs_removed = rep.pairs_in - rep.pairs_out;
  if (report != nullptr) *report = rep;
  return filtered;
}

std::vector<RewriteSet> rewrites_from_json(const json& j) {
  const json* list = &j;
  if (j.is_object()) {
    auto it = j.find("rewrites");
    if (it == j.end()) throw FormatError("rewrite file has no 'rewrites' array");
    list = &*it;
  }
  if (!list->is_array()) throw FormatError("rewrites must be an array");
  std::vector<RewriteSet> out;
  for (std::size_t i = 0; i < list->size(); ++i) {
    const auto& e = (*list)[i];
    try {
      RewriteSet rs;
      rs.pair_id = e.at("pair_id").get<std::string>();
      const auto& label = e.at("label");
      rs.label = label.is_boolean() ? label.get<bool>() : label.get<int>() == 1;
      rs.source_answer_index = e.at("source_answer_index").get<std::size_t>();
      if (auto s = e.find("source_text"); s != e.end()) {
        rs.source_text = s->get<std::string>();
      }
      rs.variants = e.at("variants").get<std::vector<std::string>>();
      rs.validate();
      out.push_back(std::move(rs));
    } catch (const json::exception& ex) {
      throw FormatError("rewrite entry " + std::to_string(i) + ": " + ex.what());
    }
  }
  return out;
}

json to_json(const std::vector<RewriteSet>& rewrites) {
  json list = json::array();
  for (const auto& rs : rewrites) {
    list.push_back({{"pair_id", rs.pair_id},
                    {"label", rs.label ? 1 : 0},
                    {"source_answer_index", rs.source_answer_index},
                    {"source_text", rs.source_text},
                    {"variants", rs.variants}});
  }
  return {{"rewrites", std::move(list)}};
}

std::vector<RewriteSet> load_rewrites(const std::filesystem::path& path) {
  return rewrites_from_json(run::read_json(path));
}

json to_json(const AugmentReport& r) {
  return {{"examples_in", r.examples_in},
          {"pairs_in", r.pairs_in},
          {"variants_added", r.variants_added},
          {"groups_truncated", r.groups_truncated},
          {"examples_removed", r.examples_removed},
          {"pairs_removed", r.pairs_removed},
          {"examples_out", r.examples_out},
          {"pairs_out", r.pairs_out}};
}

}  // namespace hsprobe::augment
