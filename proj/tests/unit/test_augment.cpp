#include <map>
#include <set>

#include "doctest.h"
#include "hsprobe/augment.hpp"
#include "hsprobe/error.hpp"
#include "hsprobe/paraphrase.hpp"
#include "hsprobe/text.hpp"

using namespace hsprobe;
using augment::RankedVariant;
using augment::RewriteSet;
using corpus::Answer;

namespace {

// Independent ROUGE-1: count tokens with a std::map and take the F1.
double rouge_oracle(const std::vector<std::string>& c, const std::vector<std::string>& r) {
  std::map<std::string, int> cc, rc;
  for (const auto& t : c) ++cc[t];
  for (const auto& t : r) ++rc[t];
  int overlap = 0;
  for (const auto& [t, n] : cc) overlap += std::min(n, rc.count(t) ? rc[t] : 0);
  if (overlap == 0) return 0.0;
  const double p = double(overlap) / double(c.size()), q = double(overlap) / double(r.size());
  return 2 * p * q / (p + q);
}

std::vector<Answer> originals(std::vector<std::string> texts, bool label = true) {
  std::vector<Answer> g;
  for (auto& t : texts) g.push_back({t, label, corpus::Origin::kOriginal});
  return g;
}

}  // namespace

TEST_CASE("ROUGE-1 hand cases") {
  CHECK(augment::rouge1("a b c", "a b c") == 1.0);
  CHECK(augment::rouge1("a b c", "x y z") == 0.0);
  CHECK(augment::rouge1("a b c", "a b d") == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(augment::rouge1("a b x y z", "a b c d e") == doctest::Approx(0.4));
  CHECK_THROWS_AS(augment::rouge1("...", "a"), DomainError);
}

TEST_CASE("ROUGE tokens: lowercase, punctuation removed, unicode spaces") {
  CHECK(augment::rouge_tokens("Привет, Мир!  «Да»") ==
        std::vector<std::string>{"привет", "мир", "да"});
  CHECK(augment::rouge_tokens("a b") == std::vector<std::string>{"a", "b"});
  CHECK(augment::rouge_tokens("well-known") == std::vector<std::string>{"wellknown"});
}

TEST_CASE("ROUGE-1 matches a map-based oracle on generated strings") {
  const char* vocab[] = {"кот", "пёс", "a", "b", "дом", "река", "c"};
  std::uint64_t state = 12345;
  auto next = [&] { state = state * 6364136223846793005ULL + 1442695040888963407ULL; return state >> 33; };
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::string> c, r;
    std::string cs, rs;
    for (std::size_t i = 0, n = 1 + next() % 8; i < n; ++i) {
      c.push_back(vocab[next() % 7]);
      cs += c.back() + " ";
    }
    for (std::size_t i = 0, n = 1 + next() % 8; i < n; ++i) {
      r.push_back(vocab[next() % 7]);
      rs += r.back() + " ";
    }
    CHECK(augment::rouge1(cs, rs) == doctest::Approx(rouge_oracle(c, r)).epsilon(1e-12));
  }
}

TEST_CASE("rank_variants") {
  const auto group = originals({"a b c d e", "f g h i j"});
  std::vector<RewriteSet> sets{{"p", true, 0, "", {"a b x y z", "a b c d e", "u v w q r"}}};
  const auto ranked = augment::rank_variants(group, sets);
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0].text == "u v w q r");
  CHECK(ranked[0].avg_rouge1 == 0.0);
  CHECK(ranked[1].text == "a b x y z");
  CHECK(ranked[1].avg_rouge1 == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(ranked[2].text == "a b c d e");
  CHECK(ranked[2].avg_rouge1 == doctest::Approx(0.5));

  // Identical to every answer scores 1 and goes last.
  const auto same = originals({"x y", "x y"});
  const auto r2 = augment::rank_variants(same, {{"p", true, 0, "", {"x y", "z", "x"}}});
  CHECK(r2.back().text == "x y");
  CHECK(r2.back().avg_rouge1 == 1.0);
}

TEST_CASE("complete_group") {
  const auto five = originals({"a", "b", "c", "d", "e"});
  std::vector<RankedVariant> ranked{{"v1", 0.1, 0, 0}, {"v2", 0.3, 0, 1}};
  CHECK(augment::complete_group(five, ranked) == five);

  const auto four = originals({"a", "b", "c", "d"});
  const auto out = augment::complete_group(four, ranked);
  REQUIRE(out.size() == 5);
  CHECK(out[4].text == "v1");
  CHECK(out[4].origin == corpus::Origin::kRewritten);
  CHECK(out[4].label == true);

  const auto two = originals({"a", "b"}, false);
  std::vector<RankedVariant> six;
  for (int i = 0; i < 6; ++i) six.push_back({"w" + std::to_string(i), 0.1 * i, 0, std::size_t(i)});
  const auto filled = augment::complete_group(two, six);
  REQUIRE(filled.size() == 5);
  CHECK(filled[2].text == "w0");
  CHECK(filled[4].text == "w2");
  CHECK_FALSE(filled[4].label);

  CHECK_THROWS_AS(augment::complete_group(two, ranked, 5, "p/false"), CapacityError);
}

TEST_CASE("post_filter") {
  auto pair_with = [](std::size_t t_len, std::size_t f_len) {
    corpus::QAPair p{"p", "q", {}};
    p.answers.push_back({std::string(t_len, 'x'), true});
    p.answers.push_back({std::string(f_len, 'y'), false});
    return p;
  };
  corpus::Dataset d{{0, "t", {pair_with(70, 105)}}, {1, "t", {pair_with(40, 40)}}};
  d[1].pairs[0].pair_id = "q";
  const auto out = augment::post_filter(d);
  REQUIRE(out.size() == 1);
  CHECK(out[0].idx == 1);
  const corpus::Dataset balanced{{1, "t", {pair_with(50, 50)}}};
  CHECK(augment::post_filter(balanced) == balanced);
}

TEST_CASE("augment_dataset lists every starved group") {
  corpus::QAPair p{"0-0", "q", {}};
  for (auto t : {"один два", "три четыре"}) p.answers.push_back({t, true});
  for (auto t : {"пять шесть", "семь восемь"}) p.answers.push_back({t, false});
  const corpus::Dataset d{{0, "text", {p}}};
  const std::vector<RewriteSet> only_true{
      {"0-0", true, 0, "один два", {"девять десять", "одиннадцать", "двенадцать"}}};
  try {
    augment::augment_dataset(d, only_true);
    FAIL("expected a capacity error");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("0-0/false") != std::string::npos);
    CHECK(e.exit_code() == 3);
  }
  std::vector<RewriteSet> both = only_true;
  both.push_back({"0-0", false, 1, "", {"девять", "десять", "тринадцать"}});
  augment::AugmentReport r;
  const auto out = augment::augment_dataset(d, both, {}, &r);
  CHECK(r.variants_added == 6);
  CHECK(out[0].pairs[0].group(true).size() == 5);
  CHECK(out[0].pairs[0].group(false).size() == 5);
  // Mismatched source text is rejected.
  std::vector<RewriteSet> wrong{{"0-0", true, 0, "не то", {"a", "b", "c"}}};
  CHECK_THROWS_AS(augment::augment_dataset(d, wrong), ValidationError);
}

TEST_CASE("oversize groups") {
  corpus::QAPair p{"0-0", "q", {}};
  for (int i = 0; i < 6; ++i) p.answers.push_back({"true answer " + std::string(1, char('a' + i)), true});
  for (int i = 0; i < 5; ++i) p.answers.push_back({"false answer " + std::string(1, char('a' + i)), false});
  const corpus::Dataset d{{0, "text", {p}}};
  augment::AugmentReport r;
  const auto out = augment::augment_dataset(d, {}, {}, &r);
  CHECK(r.groups_truncated == 1);
  CHECK(out[0].pairs[0].group(true).size() == 5);
  augment::AugmentOptions strict;
  strict.oversize = augment::OversizePolicy::kError;
  CHECK_THROWS_AS(augment::augment_dataset(d, {}, strict), CapacityError);
}

TEST_CASE("rewrite response parsing") {
  const auto v = augment::parse_rewrite_response("Rewriting:\n#1# A\n#2# B\n#3# C");
  CHECK(v == std::array<std::string, 3>{"A", "B", "C"});
  const auto shuffled = augment::parse_rewrite_response("#2# second\n#1# first\n#3# third\n");
  CHECK(shuffled == std::array<std::string, 3>{"first", "second", "third"});
  CHECK_THROWS_AS(augment::parse_rewrite_response("#1# A\n#2# B"), FormatError);
  CHECK_THROWS_AS(augment::parse_rewrite_response("#1# A #1# B #2# C #3# D"), FormatError);
  CHECK_THROWS_AS(augment::parse_rewrite_response("#1#\n#2# B\n#3# C"), FormatError);
}

TEST_CASE("paraphrase prompt") {
  const auto p = augment::paraphrase_prompt("Ответ.");
  CHECK(p.find("#1# Variant 1") != std::string::npos);
  CHECK(p.find("Text: Ответ.\nRewriting:") != std::string::npos);
}

TEST_CASE("fetch_paraphrases asks only for short groups, with retries") {
  corpus::QAPair p{"0-0", "q", {}};
  for (auto t : {"t one", "t two", "t three", "t four", "t five"}) p.answers.push_back({t, true});
  for (auto t : {"f one", "f two"}) p.answers.push_back({t, false});
  const corpus::Dataset d{{0, "text", {p}}};
  int calls = 0;
  std::set<std::string> prompts;
  auto fake = [&](const std::string& prompt) -> std::string {
    ++calls;
    prompts.insert(prompt);
    if (calls == 1) return "garbage";
    return "#1# x\n#2# y\n#3# z";
  };
  const auto sets = augment::fetch_paraphrases(d, fake);
  REQUIRE(sets.size() == 2);
  CHECK(calls == 3);
  CHECK_FALSE(sets[0].label);
  CHECK(sets[1].source_answer_index == 1);
  CHECK(sets[1].source_text == "f two");

  augment::FetchOptions no_retry;
  no_retry.max_retries = 0;
  calls = 0;
  CHECK_THROWS_AS(augment::fetch_paraphrases(d, fake, no_retry), FormatError);
}

TEST_CASE("rewrite files roundtrip") {
  std::vector<RewriteSet> sets{{"0-0", true, 1, "src", {"a", "b", "c"}}};
  const auto back = augment::rewrites_from_json(augment::to_json(sets));
  REQUIRE(back.size() == 1);
  CHECK(back[0].variants == sets[0].variants);
  CHECK(back[0].source_answer_index == 1);
  CHECK_THROWS(augment::rewrites_from_json(nlohmann::json::parse(
      R"({"rewrites": [{"pair_id": "x", "label": 1, "source_answer_index": 0, "variants": ["a", "b"]}]})")));
}
