#include "hsprobe/corpus.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <iterator>
#include <regex>
#include <set>
#include <sstream>

#include "hsprobe/augment.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/run.hpp"
#include "hsprobe/text.hpp"

namespace hsprobe::corpus {
namespace {

using nlohmann::json;

std::string record_context(std::size_t record) {
  return "record " + std::to_string(record);
}

bool parse_label(const json& a, std::size_t record, bool allow_unlabeled) {
  auto it = a.find("label");
  if (it == a.end() || it->is_null()) {
    if (allow_unlabeled) return false;
    throw ValidationError(record_context(record) + ": answer without label");
  }
  if (it->is_boolean()) return it->get<bool>();
  if (it->is_number_integer()) {
    const auto v = it->get<long long>();
    if (v == 0 || v == 1) return v == 1;
  }
  throw ValidationError(record_context(record) + ": label must be 0 or 1");
}

Example parse_example(const json& rec, std::size_t record,
                      const ParseOptions& options) {
  if (!rec.is_object()) {
    throw FormatError(record_context(record) + ": not a JSON object");
  }
  Example ex;
  if (auto it = rec.find("idx"); it != rec.end() && it->is_number_integer()) {
    ex.idx = it->get<std::int64_t>();
  } else if (auto id = rec.find("id"); id != rec.end() && id->is_number_integer()) {
    ex.idx = id->get<std::int64_t>();
  } else {
    throw FormatError(record_context(record) + ": missing integer idx/id");
  }

  const json* body = &rec;
  if (auto p = rec.find("passage"); p != rec.end() && p->is_object()) {
    body = &*p;
  }
  auto text = body->find("text");
  if (text == body->end() || !text->is_string()) {
    throw FormatError(record_context(record) + ": missing text");
  }
  ex.text = text->get<std::string>();

  const json* questions = nullptr;
  if (auto q = body->find("questions"); q != body->end()) {
    questions = &*q;
  } else if (auto top = rec.find("questions"); top != rec.end()) {
    questions = &*top;
  }
  if (questions == nullptr || !questions->is_array()) {
    throw FormatError(record_context(record) + ": missing questions array");
  }
  std::size_t qpos = 0;
  for (const auto& q : *questions) {
    QAPair pair;
    auto qtext = q.find("question");
    if (!q.is_object() || qtext == q.end() || !qtext->is_string()) {
      throw FormatError(record_context(record) + ": question " +
                        std::to_string(qpos) + " has no text");
    }
    pair.question = qtext->get<std::string>();
    if (auto pid = q.find("pair_id"); pid != q.end() && pid->is_string()) {
      pair.pair_id = pid->get<std::string>();
    } else {
      pair.pair_id = std::to_string(ex.idx) + "-" + std::to_string(qpos);
    }
    auto answers = q.find("answers");
    if (answers == q.end() || !answers->is_array()) {
      throw FormatError(record_context(record) + ": question " +
                        std::to_string(qpos) + " has no answers array");
    }
    for (const auto& a : *answers) {
      auto atext = a.find("text");
      if (!a.is_object() || atext == a.end() || !atext->is_string()) {
        throw FormatError(record_context(record) + ": answer without text");
      }
      Answer ans;
      ans.text = atext->get<std::string>();
      if (text::trim(ans.text).empty()) {
        throw ValidationError(record_context(record) + ": empty answer text");
      }
      ans.label = parse_label(a, record, options.allow_unlabeled);
      if (auto o = a.find("origin"); o != a.end() && o->is_string()) {
        ans.origin = origin_from_string(o->get<std::string>());
      }
      pair.answers.push_back(std::move(ans));
    }
    ex.pairs.push_back(std::move(pair));
    ++qpos;
  }
  return ex;
}

void check_unique_pair_ids(const Dataset& d) {
  std::set<std::string> seen;
  for (const auto& ex : d) {
    for (const auto& p : ex.pairs) {
      if (!seen.insert(p.pair_id).second) {
        throw ValidationError("duplicate pair_id " + p.pair_id);
      }
    }
  }
}

double mean_length(const QAPair& pair, bool label) {
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& a : pair.answers) {
    if (a.label != label) continue;
    total += static_cast<double>(text::char_length(a.text));
    ++n;
  }
  return n == 0 ? 0.0 : total / static_cast<double>(n);
}

}  // namespace

std::string_view to_string(Origin origin) {
  return origin == Origin::kOriginal ? "original" : "rewritten";
}

Origin origin_from_string(std::string_view s) {
  if (s == "original") return Origin::kOriginal;
  if (s == "rewritten") return Origin::kRewritten;
  throw FormatError("unknown answer origin '" + std::string(s) + "'");
}

std::vector<Answer> QAPair::group(bool label) const {
  std::vector<Answer> out;
  for (const auto& a : answers) {
    if (a.label == label) out.push_back(a);
  }
  return out;
}

std::vector<std::size_t> QAPair::group_indices(bool label) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < answers.size(); ++i) {
    if (answers[i].label == label) out.push_back(i);
  }
  return out;
}

std::size_t count_pairs(const Dataset& dataset) {
  std::size_t n = 0;
  for (const auto& ex : dataset) n += ex.pairs.size();
  return n;
}

std::size_t count_answers(const Dataset& dataset) {
  std::size_t n = 0;
  for (const auto& ex : dataset) {
    for (const auto& p : ex.pairs) n += p.answers.size();
  }
  return n;
}

Dataset dataset_from_json(const json& j, const ParseOptions& options) {
  if (!j.is_array()) throw FormatError("dataset JSON must be an array");
  Dataset out;
  out.reserve(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_example(j[i], i, options));
  }
  check_unique_pair_ids(out);
  return out;
}

Dataset parse_dataset(std::istream& in, const ParseOptions& options) {
  const std::string content{std::istreambuf_iterator<char>(in),
                            std::istreambuf_iterator<char>()};
  auto format = options.format;
  if (format == DatasetFormat::kAuto) {
    const auto first = content.find_first_not_of(" \t\r\n");
    format = (first != std::string::npos && content[first] == '[')
                 ? DatasetFormat::kSingleJson
                 : DatasetFormat::kJsonl;
  }
  if (format == DatasetFormat::kSingleJson) {
    json j;
    try {
      j = json::parse(content);
    } catch (const json::parse_error& e) {
      throw FormatError(std::string("malformed JSON dataset: ") + e.what());
    }
    return dataset_from_json(j, options);
  }

  Dataset out;
  std::istringstream lines(content);
  std::string line;
  std::size_t record = 0;
  while (std::getline(lines, line)) {
    if (text::trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(record_context(record) + ": malformed JSON: " + e.what());
    }
    out.push_back(parse_example(j, record, options));
    ++record;
  }
  check_unique_pair_ids(out);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path,
                     const ParseOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_dataset(in, options);
}

std::string normalize_text(std::string_view raw) {
  static const std::regex marker(R"(\([0-9]+\) ?)");
  std::string current(raw);
  for (;;) {
    std::string next = std::regex_replace(current, marker, "");
    if (next == current) return next;
    current = std::move(next);
  }
}

Dataset normalize_dataset(Dataset dataset) {
  for (auto& ex : dataset) ex.text = normalize_text(ex.text);
  return dataset;
}

void SelectionCriteria::validate() const {
  if (min_true < 1 || min_false < 1 || min_words < 1) {
    throw ValidationError("selection counts must be at least 1");
  }
  if (!(max_len_diff_chars >= 0.0)) {
    throw ValidationError("max_len_diff_chars must be non-negative");
  }
}

double length_gap(const QAPair& pair) {
  bool has_true = false, has_false = false;
  for (const auto& a : pair.answers) (a.label ? has_true : has_false) = true;
  if (!has_true || !has_false) return 0.0;
  return std::fabs(mean_length(pair, true) - mean_length(pair, false));
}

std::array<bool, 4> violated_conditions(const QAPair& pair,
                                        const SelectionCriteria& c) {
  std::size_t n_true = 0, n_false = 0;
  bool short_answer = false, digit = false;
  for (const auto& a : pair.answers) {
    (a.label ? n_true : n_false) += 1;
    if (text::word_count(a.text) < c.min_words) short_answer = true;
    if (c.forbid_digits && text::contains_decimal_digit(a.text)) digit = true;
  }
  return {n_true < c.min_true || n_false < c.min_false, short_answer,
          length_gap(pair) > c.max_len_diff_chars, digit};
}

Dataset select_pairs(const Dataset& dataset, const SelectionCriteria& criteria,
                     SelectionReport* report) {
  criteria.validate();
  SelectionReport rep;
  rep.examples_in = dataset.size();
  Dataset out;
  for (const auto& ex : dataset) {
    Example kept{ex.idx, ex.text, {}};
    for (const auto& pair : ex.pairs) {
      ++rep.pairs_in;
      const auto v = violated_conditions(pair, criteria);
      bool rejected = false;
      for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k]) continue;
        ++rep.violations[k];
        if (!rejected) ++rep.first_failure[k];
        rejected = true;
      }
      if (!rejected) kept.pairs.push_back(pair);
    }
    if (!kept.pairs.empty()) out.push_back(std::move(kept));
  }
  rep.examples_out = out.size();
  rep.pairs_out = count_pairs(out);
  rep.answers_out = count_answers(out);
  if (report != nullptr) *report = rep;
  return out;
}

double intra_group_rouge1(const std::vector<Answer>& group) {
  double total = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < group.size(); ++i) {
    for (std::size_t j = i + 1; j < group.size(); ++j) {
      total += augment::rouge1(group[i].text, group[j].text);
      ++n;
    }
  }
  if (n == 0) throw DomainError("intra-group ROUGE needs at least two answers");
  return total / static_cast<double>(n);
}

CorpusStats corpus_stats(const Dataset& dataset) {
  if (dataset.empty()) throw DomainError("corpus statistics of an empty dataset");
  CorpusStats s;
  s.examples = dataset.size();
  double text_len = 0.0;
  struct Acc {
    double len = 0.0;
    std::size_t answers = 0;
    double rouge = 0.0;
    std::size_t groups = 0;
  } acc_true, acc_false;
  for (const auto& ex : dataset) {
    text_len += static_cast<double>(text::char_length(ex.text));
    for (const auto& pair : ex.pairs) {
      ++s.pairs;
      s.answers += pair.answers.size();
      for (bool label : {true, false}) {
        auto& acc = label ? acc_true : acc_false;
        const auto group = pair.group(label);
        for (const auto& a : group) {
          acc.len += static_cast<double>(text::char_length(a.text));
          ++acc.answers;
        }
        if (group.size() >= 2) {
          acc.rouge += intra_group_rouge1(group);
          ++acc.groups;
        }
      }
    }
  }
  s.avg_text_len = text_len / static_cast<double>(dataset.size());
  auto finish = [](const Acc& acc) {
    GroupStats g;
    g.answers = acc.answers;
    g.groups_scored = acc.groups;
    g.avg_answer_len = acc.answers ? acc.len / static_cast<double>(acc.answers) : 0.0;
    g.intra_group_rouge1 = acc.groups ? acc.rouge / static_cast<double>(acc.groups) : 0.0;
    return g;
  };
  s.true_group = finish(acc_true);
  s.false_group = finish(acc_false);
  return s;
}

json to_json(const Dataset& dataset) {
  json out = json::array();
  for (const auto& ex : dataset) {
    json questions = json::array();
    for (const auto& pair : ex.pairs) {
      json answers = json::array();
      for (const auto& a : pair.answers) {
        answers.push_back({{"text", a.text},
                           {"label", a.label ? 1 : 0},
                           {"origin", std::string(to_string(a.origin))}});
      }
      questions.push_back({{"pair_id", pair.pair_id},
                           {"question", pair.question},
                           {"answers", std::move(answers)}});
    }
    out.push_back({{"idx", ex.idx}, {"text", ex.text}, {"questions", std::move(questions)}});
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  run::write_json(path, to_json(dataset));
}

json to_json(const SelectionCriteria& c) {
  return {{"min_true", c.min_true},
          {"min_false", c.min_false},
          {"min_words", c.min_words},
          {"max_len_diff_chars", c.max_len_diff_chars},
          {"forbid_digits", c.forbid_digits}};
}

json to_json(const SelectionReport& r) {
  static const char* names[] = {"group_sizes", "min_words", "length_balance",
                                "digits"};
  json first = json::object(), all = json::object();
  for (std::size_t k = 0; k < 4; ++k) {
    first[names[k]] = r.first_failure[k];
    all[names[k]] = r.violations[k];
  }
  return {{"examples_in", r.examples_in},
          {"pairs_in", r.pairs_in},
          {"examples_out", r.examples_out},
          {"pairs_out", r.pairs_out},
          {"answers_out", r.answers_out},
          {"rejected_by_first_failure", std::move(first)},
          {"violations", std::move(all)}};
}

json to_json(const CorpusStats& s) {
  auto group = [](const GroupStats& g) {
    return json{{"avg_answer_len", g.avg_answer_len},
                {"intra_group_rouge1", g.intra_group_rouge1},
                {"answers", g.answers},
                {"groups_scored", g.groups_scored}};
  };
  return {{"examples", s.examples},
          {"pairs", s.pairs},
          {"answers", s.answers},
          {"avg_text_len", s.avg_text_len},
          {"true", group(s.true_group)},
          {"false", group(s.false_group)}};
}

const QAPair* find_pair(const Dataset& dataset, std::string_view pair_id) {
  for (const auto& ex : dataset) {
    for (const auto& p : ex.pairs) {
      if (p.pair_id == pair_id) return &p;
    }
  }
  return nullptr;
}

const Example* find_example(const Dataset& dataset, std::string_view pair_id) {
  for (const auto& ex : dataset) {
    for (const auto& p : ex.pairs) {
      if (p.pair_id == pair_id) return &ex;
    }
  }
  return nullptr;
}

}  // namespace hsprobe::corpus
