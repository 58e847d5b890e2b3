#include <sstream>

#include "doctest.h"
#include "hsprobe/augment.hpp"
#include "hsprobe/corpus.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/text.hpp"

using namespace hsprobe;
using corpus::Answer;

namespace {

corpus::Dataset parse(const std::string& s, corpus::ParseOptions o = {}) {
  std::istringstream in(s);
  return corpus::parse_dataset(in, o);
}

corpus::QAPair make_pair(std::vector<std::string> t, std::vector<std::string> f) {
  corpus::QAPair p{"p", "q", {}};
  for (auto& s : t) p.answers.push_back({s, true, corpus::Origin::kOriginal});
  for (auto& s : f) p.answers.push_back({s, false, corpus::Origin::kOriginal});
  return p;
}

}  // namespace

TEST_CASE("parse: empty stream gives an empty dataset") {
  CHECK(parse("").empty());
  CHECK(parse("\n  \n").empty());
}

TEST_CASE("parse: one example, two questions, 2T/2F each") {
  const std::string rec = R"({"idx": 7, "passage": {"text": "T", "questions": [
    {"question": "Q1", "answers": [{"text": "a", "label": 1}, {"text": "b", "label": 1},
                                   {"text": "c", "label": 0}, {"text": "d", "label": 0}]},
    {"question": "Q2", "answers": [{"text": "e", "label": true}, {"text": "f", "label": 1},
                                   {"text": "g", "label": false}, {"text": "h", "label": 0}]}]}})";
  std::string one_line = rec;
  std::erase(one_line, '\n');
  const auto d = parse(one_line);
  REQUIRE(d.size() == 1);
  CHECK(d[0].idx == 7);
  CHECK(corpus::count_pairs(d) == 2);
  CHECK(corpus::count_answers(d) == 8);
  CHECK(d[0].pairs[1].pair_id == "7-1");
  CHECK(d[0].pairs[1].group(true).size() == 2);
  // Same record as a JSON array.
  CHECK(parse("[" + rec + "]") == d);
}

TEST_CASE("parse: errors name the record") {
  const std::string good = R"({"idx": 0, "text": "T", "questions": [{"question": "Q", "answers": [{"text": "a", "label": 1}]}]})";
  const std::string unlabeled = R"({"idx": 1, "text": "T", "questions": [{"question": "Q", "answers": [{"text": "a"}]}]})";
  try {
    parse(good + "\n" + unlabeled + "\n");
    FAIL("expected a validation error");
  } catch (const Error& e) {
    CHECK(e.exit_code() == 2);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }
  corpus::ParseOptions lenient;
  lenient.allow_unlabeled = true;
  CHECK(corpus::count_answers(parse(unlabeled, lenient)) == 1);
  CHECK_THROWS_AS(parse("{not json"), FormatError);
  const std::string dup = R"({"idx": 0, "text": "T", "questions": [{"pair_id": "x", "question": "Q", "answers": []}, {"pair_id": "x", "question": "Q", "answers": []}]})";
  CHECK_THROWS_AS(parse(dup), ValidationError);
}

TEST_CASE("normalize_text") {
  CHECK(corpus::normalize_text("(1) The Norwegian men's team won (2) They were ahead") ==
        "The Norwegian men's team won They were ahead");
  CHECK(corpus::normalize_text("no markers here") == "no markers here");
  CHECK(corpus::normalize_text("(12)Start (3) mid end") == "Start mid end");
  // Removing one marker can expose another; the result is a fixpoint.
  const auto once = corpus::normalize_text("a ((1) 2) b");
  CHECK(corpus::normalize_text(once) == once);
  CHECK(corpus::normalize_text("(x) stays") == "(x) stays");
}

TEST_CASE("selection conditions") {
  const corpus::SelectionCriteria c;
  const std::string five_a = "один два три четыре пять";
  const std::string five_b = "шесть семь восемь девять десять";
  auto ok = make_pair({five_a, five_b}, {five_b, five_a});
  CHECK(corpus::violated_conditions(ok, c) == std::array<bool, 4>{false, false, false, false});

  auto four = make_pair({"один два три четыре", five_b}, {five_b, five_a});
  CHECK(corpus::violated_conditions(four, c)[1]);

  auto sizes = make_pair({five_a}, {five_b, five_a});
  CHECK(corpus::violated_conditions(sizes, c)[0]);

  auto digits = make_pair({five_a + " 1905", five_b}, {five_b, five_a});
  CHECK(corpus::violated_conditions(digits, c)[3]);
  auto relaxed = c;
  relaxed.forbid_digits = false;
  CHECK_FALSE(corpus::violated_conditions(digits, relaxed)[3]);

  // Digit-free answers with a 45-character gap in mean length.
  const std::string pad(45, 'x');
  auto gap = make_pair({five_a + pad, five_b + pad}, {five_a, five_b});
  CHECK(corpus::length_gap(gap) == doctest::Approx(45.0));
  CHECK(corpus::violated_conditions(gap, c)[2]);
  // Exactly 30 is allowed.
  auto edge = make_pair({five_a + std::string(30, 'y'), five_b + std::string(30, 'y')},
                        {five_a, five_b});
  CHECK_FALSE(corpus::violated_conditions(edge, c)[2]);
}

TEST_CASE("select_pairs keeps passing pairs and drops emptied examples") {
  const std::string five = "один два три четыре пять";
  corpus::Dataset d{{0, "text zero", {make_pair({five, five}, {five, five})}},
                    {1, "text one", {make_pair({five}, {five, five})}}};
  d[0].pairs[0].pair_id = "0-0";
  d[1].pairs[0].pair_id = "1-0";
  corpus::SelectionReport r;
  const auto out = corpus::select_pairs(d, {}, &r);
  REQUIRE(out.size() == 1);
  CHECK(out[0].pairs[0].pair_id == "0-0");
  CHECK(r.examples_in == 2);
  CHECK(r.pairs_in == 2);
  CHECK(r.examples_out == 1);
  CHECK(r.pairs_out == 1);
  CHECK(r.answers_out == 4);
  CHECK(r.first_failure[0] == 1);
}

TEST_CASE("intra-group ROUGE-1") {
  CHECK(corpus::intra_group_rouge1({{"a b c d e", true}, {"a b c x y", true}}) ==
        doctest::Approx(0.6).epsilon(1e-12));
  CHECK(corpus::intra_group_rouge1({{"same words here", false}, {"same words here", false}}) == 1.0);
  CHECK_THROWS_AS(corpus::intra_group_rouge1({{"alone", true}}), DomainError);
}

TEST_CASE("corpus_stats against a direct recount") {
  corpus::Dataset d{{0, "Текст.", {make_pair({"a b c d e", "a b c x y"}, {"q r s", "q r s t"})}},
                    {1, "Longer text", {make_pair({"x", "y z"}, {"m n", "m n"})}}};
  const auto s = corpus::corpus_stats(d);
  CHECK(s.examples == 2);
  CHECK(s.pairs == 2);
  CHECK(s.answers == 8);
  CHECK(s.avg_text_len == doctest::Approx((6.0 + 11.0) / 2));
  // Oracle: per-answer character counts averaged over all true (false) answers.
  double t = 0, f = 0;
  for (const auto& ex : d)
    for (const auto& p : ex.pairs)
      for (const auto& a : p.answers) (a.label ? t : f) += double(text::char_length(a.text));
  CHECK(s.true_group.avg_answer_len == doctest::Approx(t / 4));
  CHECK(s.false_group.avg_answer_len == doctest::Approx(f / 4));
  // ROUGE: mean over groups of the within-group pair score.
  const double r_true = (0.6 + augment::rouge1("x", "y z")) / 2;
  const double r_false = (augment::rouge1("q r s", "q r s t") + 1.0) / 2;
  CHECK(s.true_group.intra_group_rouge1 == doctest::Approx(r_true));
  CHECK(s.false_group.intra_group_rouge1 == doctest::Approx(r_false));
  CHECK_THROWS_AS(corpus::corpus_stats({}), DomainError);
}

TEST_CASE("dataset json roundtrip keeps origin") {
  corpus::Dataset d{{3, "T", {make_pair({"a"}, {"b"})}}};
  d[0].pairs[0].answers[1].origin = corpus::Origin::kRewritten;
  CHECK(corpus::dataset_from_json(corpus::to_json(d)) == d);
  CHECK(corpus::find_pair(d, "p") != nullptr);
  CHECK(corpus::find_pair(d, "nope") == nullptr);
  CHECK(corpus::find_example(d, "p")->idx == 3);
}
