#include <cmath>

#include "doctest.h"
#include "hsprobe/error.hpp"
#include "hsprobe/simkit.hpp"

using namespace hsprobe;
using bundle::SequenceStates;
using simkit::PairStates;

namespace {

SequenceStates one_layer(std::vector<float> v) {
  const auto dims = v.size();
  return SequenceStates(1, dims, std::move(v));
}

PairStates make_pair(std::vector<SequenceStates> states, std::vector<bool> labels) {
  PairStates p{"p", {}, labels, std::move(states)};
  for (std::size_t i = 0; i < labels.size(); ++i) p.answer_indices.push_back(i);
  return p;
}

}  // namespace

TEST_CASE("cosine") {
  const std::vector<float> v{0.3f, -1.2f, 4.0f};
  CHECK(simkit::cosine(v, v) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<float> x{1, 0}, y{0, 1}, xy{1, 1};
  CHECK(simkit::cosine(x, y) == 0.0);
  CHECK(simkit::cosine(x, xy) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  const std::vector<float> zero{0, 0};
  CHECK_THROWS_AS(simkit::cosine(x, zero), DomainError);
  CHECK_THROWS_AS(simkit::cosine(x, v), DomainError);
}

TEST_CASE("seq_to_group") {
  const auto s = one_layer({1, 0});
  std::vector<const SequenceStates*> self{&s};
  CHECK(simkit::seq_to_group(s, self, 0, false) == 1.0);
  CHECK_THROWS_AS(simkit::seq_to_group(s, self, 0, true), DomainError);

  // Members at cosine 0.4 and 0.8 from s.
  const auto a = one_layer({0.4f, float(std::sqrt(1 - 0.16))});
  const auto b = one_layer({0.8f, 0.6f});
  std::vector<const SequenceStates*> group{&a, &b};
  CHECK(simkit::seq_to_group(s, group, 0, true) == doctest::Approx(0.6).epsilon(1e-7));

  const auto t = one_layer({2, 0}), u = one_layer({3, 0});
  std::vector<const SequenceStates*> same{&s, &t, &u};
  CHECK(simkit::seq_to_group(s, same, 0, true) == 1.0);
}

TEST_CASE("layer_matrix layout: false rows first, 10x32") {
  std::vector<SequenceStates> states;
  std::vector<bool> labels;
  for (int i = 0; i < 10; ++i) {
    std::vector<float> v(32 * 4);
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = float((i * 7 + k * 3) % 11) + 1.0f;
    states.emplace_back(32, 4, std::move(v));
    labels.push_back(i < 5);  // true answers first in the input
  }
  const auto m = simkit::layer_matrix(make_pair(std::move(states), labels), true, true);
  CHECK(m.rows.size() == 10);
  CHECK(m.layers == 32);
  CHECK(m.values.size() == 320);
  CHECK_FALSE(m.rows[0].label);
  CHECK(m.rows[0].answer_index == 5);
  CHECK(m.rows[5].label);
  CHECK(m.rows[5].answer_index == 0);
}

TEST_CASE("identical vectors give an all-ones matrix") {
  std::vector<SequenceStates> states(4, SequenceStates(3, 2, {1, 2, 3, 4, 5, 6}));
  const auto p = make_pair(states, {true, true, false, false});
  const auto a = simkit::analyze_pair(p, true);
  for (double v : a.to_false.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(a.averages.own_true == doctest::Approx(1.0));
  CHECK(a.averages.cross_false_to_true == doctest::Approx(1.0));
}

TEST_CASE("single layer matrix equals hand-computed group means") {
  // Two true (t0, t1) and two false (f0, f1) unit-ish vectors in 2-D.
  const auto t0 = one_layer({1, 0}), t1 = one_layer({0, 1});
  const auto f0 = one_layer({1, 1}), f1 = one_layer({-1, 0});
  const auto p = make_pair({t0, t1, f0, f1}, {true, true, false, false});
  const auto to_true = simkit::layer_matrix(p, true, true);
  const double r = 1.0 / std::sqrt(2.0);
  // Rows: f0, f1, t0, t1.
  CHECK(to_true.at(0, 0) == doctest::Approx((r + r) / 2));
  CHECK(to_true.at(1, 0) == doctest::Approx((-1.0 + 0.0) / 2));
  CHECK(to_true.at(2, 0) == doctest::Approx(0.0));  // t0 vs t1 only
  CHECK(to_true.at(3, 0) == doctest::Approx(0.0));
  const auto to_false = simkit::layer_matrix(p, false, true);
  CHECK(to_false.at(0, 0) == doctest::Approx(-r));  // f0 vs f1
  CHECK(to_false.at(2, 0) == doctest::Approx((r - 1.0) / 2));
  const auto with_self = simkit::layer_matrix(p, false, false);
  CHECK(with_self.at(0, 0) == doctest::Approx((1.0 - r) / 2));
}

TEST_CASE("pair averages of a 2-answer, 2-layer fixture") {
  simkit::SimilarityMatrix to_true{"p", true, 2, {{0, false}, {1, true}}, {0.1, 0.3, 0.5, 0.9}};
  simkit::SimilarityMatrix to_false{"p", false, 2, {{0, false}, {1, true}}, {0.2, 0.4, 0.6, 0.8}};
  const auto av = simkit::pair_averages(to_false, to_true);
  CHECK(av.own_true == doctest::Approx(0.7));
  CHECK(av.cross_false_to_true == doctest::Approx(0.2));
  CHECK(av.cross_true_to_false == doctest::Approx(0.7));
  CHECK(av.own_false == doctest::Approx(0.3));
  CHECK_THROWS_AS(simkit::pair_averages(to_true, to_false), ValidationError);
}

TEST_CASE("category means") {
  simkit::PairAverages a{"a", 0.8, 0.5, 0.3, 0.6};
  simkit::PairAverages b{"b", 0.9, 0.1, 0.7, 0.4};
  const std::vector<simkit::PairAverages> one{a};
  const auto c1 = simkit::category_means(one);
  CHECK(c1.own_true == 0.8);
  CHECK(c1.cross == doctest::Approx(0.4));
  CHECK(c1.own_false == 0.6);
  const std::vector<simkit::PairAverages> two{a, b};
  const auto c2 = simkit::category_means(two);
  CHECK(c2.own_true == doctest::Approx(0.85));
  CHECK(c2.cross == doctest::Approx((0.5 + 0.3 + 0.1 + 0.7) / 4));
  CHECK(c2.n_pairs == 2);
  CHECK_THROWS_AS(simkit::category_means({}), DomainError);
}

TEST_CASE("histogram") {
  const std::vector<double> same(10, 0.42);
  const auto h1 = simkit::similarity_histogram(same, 4);
  CHECK(h1.counts == std::vector<std::size_t>{10});
  const std::vector<double> v{0.0, 0.25, 0.5, 0.75, 1.0};
  const auto h2 = simkit::similarity_histogram(v, 2);
  CHECK(h2.counts == std::vector<std::size_t>{2, 3});
  CHECK(h2.edges == std::vector<double>{0.0, 0.5, 1.0});
  std::vector<double> many;
  for (int i = 0; i < 97; ++i) many.push_back(std::sin(i * 1.3));
  const auto h3 = simkit::similarity_histogram(many, 7);
  std::size_t total = 0;
  for (auto c : h3.counts) total += c;
  CHECK(total == 97);
  CHECK_THROWS_AS(simkit::similarity_histogram(v, 0), DomainError);
}

TEST_CASE("analysis json roundtrip") {
  std::vector<SequenceStates> states;
  for (int i = 0; i < 4; ++i) states.push_back(SequenceStates(2, 2, {1.0f + i, 2, 3, 4.0f - i}));
  const std::vector<PairStates> pairs{make_pair(states, {true, false, true, false})};
  const auto r = simkit::analyze("m", pairs, true, 5, 2);
  const auto back = simkit::analysis_from_json(simkit::to_json(r));
  CHECK(simkit::to_json(back) == simkit::to_json(r));
  CHECK_THROWS_AS(simkit::analysis_from_json(nlohmann::json::object()), FormatError);
}
