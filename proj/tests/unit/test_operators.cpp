#include <doctest.h>

#include <algorithm>
#include <set>

#include "evolmath/error.hpp"
#include "evolmath/operators.hpp"
#include "../support/builders.hpp"
#include "../support/oracle.hpp"

using namespace evolmath;
namespace ts = testing_support;

namespace {

std::size_t count_tag(const Problem& p, ConditionTag tag) {
  return static_cast<std::size_t>(std::count_if(p.noise_conditions.begin(), p.noise_conditions.end(),
                                                [&](const LinearCondition& c) { return c.tag == tag; }));
}

oracle::Q value_at(const LinearCondition& c, const Assignment& a) {
  oracle::Q s = 0;
  for (const auto& [v, coef] : c.terms) s += oracle::Q(coef) * oracle::Q(a.at(v));
  return s;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("shortcut variable") {
  // v2 is pinned by the single equation 2*v2 = 6; v1 needs both.
  const auto c = ts::core({ts::eq({{1, 1}, {2, 1}}, 8), ts::eq({{2, 2}}, 6)}, {5, 3}, 1);
  CHECK(find_shortcut_variable(c) == VarId{2});
  CHECK_FALSE(find_shortcut_variable(ts::core({ts::eq({{1, 1}}, 4)}, {4}, 1)).has_value());
}

TEST_CASE("approximate replacement records the trap of its pseudo-condition") {
  for (int i = 0; i < 100; ++i) {
    const auto p = ts::seed_problem(5, "s" + std::to_string(i));
    Rng rng(static_cast<std::uint64_t>(i));
    Problem out;
    try {
      out = approximate_replacement(p, rng);
    } catch (const OperatorSkip&) {
      continue;
    }
    REQUIRE(count_tag(out, ConditionTag::ShortcutPseudo) == 1);
    const auto& pseudo = *std::find_if(out.noise_conditions.begin(), out.noise_conditions.end(),
                                       [](const LinearCondition& c) { return c.tag == ConditionTag::ShortcutPseudo; });
    CHECK(pseudo.relation != Relation::Equal);
    REQUIRE(out.trap_answer.has_value());
    CHECK(*out.trap_answer != out.answer);
    // target - m*s = d, so the trap is m*s + d evaluated at the preset solution.
    VarId s;
    std::int64_t m = 0;
    for (const auto& [v, coef] : pseudo.terms) {
      if (v == out.core.target) {
        CHECK(coef == 1);
      } else {
        s = v;
        m = -coef;
      }
    }
    CHECK((m == 1 || m == 2));
    CHECK(std::abs(pseudo.rhs) <= 5);
    CHECK(*out.trap_answer == m * out.core.solution.at(s) + pseudo.rhs);
    CHECK(out.core == p.core);
    CHECK(out.lineage.size() == p.lineage.size() + 1);
    CHECK(validate(out).empty());
    CHECK_THROWS_AS(approximate_replacement(out, rng), OperatorSkip);
  }
}

TEST_CASE("useless conditions") {
  const auto p = ts::seed_problem(5, "u");
  Rng rng(1);
  const auto out = add_useless_conditions(p, 2, rng);
  CHECK(out.all_variables().size() == 7);
  CHECK(count_tag(out, ConditionTag::UselessNoise) == 2);
  CHECK(out.core == p.core);
  CHECK(validate(out).empty());
  for (const auto& c : out.noise_conditions) {
    CHECK(c.relation == Relation::Equal);
    CHECK(value_at(c, out.noise_solution) == oracle::Q(c.rhs));
  }
  CHECK(add_useless_conditions(p, 0, rng) == p);
}

TEST_CASE("misleading math is off by a nonzero perturbation") {
  const auto p = ts::seed_problem(5, "m");
  Rng rng(2);
  const auto out = add_misleading_math(p, 3, rng);
  CHECK(count_tag(out, ConditionTag::MisleadingMath) == 3);
  for (const auto& c : out.noise_conditions) {
    CHECK(c.relation != Relation::Equal);
    const auto delta = oracle::Q(c.rhs) - value_at(c, out.core.solution);
    CHECK(delta != 0);
    CHECK(abs(delta) >= 2);
    CHECK(abs(delta) <= 7);
  }
  CHECK(validate(out).empty());
  CHECK(add_misleading_math(p, 0, rng) == p);
}

TEST_CASE("linguistic operators") {
  const auto p = ts::seed_problem(5, "l");
  Rng rng(3);
  const auto t = add_misleading_text(p, 1, rng);
  REQUIRE(t.narrative.misleading_sentences.size() == 1);
  const auto& bank = Banks::builtin().misleading_text;
  CHECK(std::find(bank.begin(), bank.end(), t.narrative.misleading_sentences[0]) != bank.end());
  CHECK(add_misleading_text(p, 0, rng) == p);

  const auto f = add_irrelevant_topic(p, 1, rng);
  CHECK(f.narrative.irrelevant_fragments.size() == 1);
  CHECK(add_irrelevant_topic(p, 0, rng) == p);

  const auto b = add_background(p, rng);
  REQUIRE(b.narrative.theme.has_value());
  std::set<std::string> names;
  for (const auto& [v, name] : b.narrative.entity_names) {
    names.insert(name);
    CHECK(std::none_of(name.begin(), name.end(), [](unsigned char ch) { return std::isdigit(ch); }));
  }
  CHECK(names.size() == 5);

  Rng r1(8), r2(8);
  CHECK(add_background(b, r1) == add_background(b, r2));

  Banks tiny = Banks::builtin();
  tiny.themes = {Theme{"small", "A tiny shop.", {"the apples", "the pears"}}};
  CHECK_THROWS_AS(add_background(p, rng, tiny), OperatorSkip);
}

TEST_CASE("mutation preserves the oracle answer") {
  OperatorSuiteConfig suite;
  for (int i = 0; i < 100; ++i) {
    const auto p = ts::seed_problem(6, "s" + std::to_string(i));
    const auto before = oracle::answer(p.core);
    Rng rng(derive_seed(6, "mutate:" + p.id));
    std::vector<std::string> skipped;
    const auto out = mutate(p, suite, rng, Banks::builtin(), {}, &skipped);
    CHECK(oracle::answer(out.core) == before);
    CHECK(oracle::Q(out.answer) == *before);
    if (out.trap_answer) CHECK(*out.trap_answer != out.answer);
    CHECK(validate(out).empty());
  }
}

TEST_CASE("operator groups follow the suite flags") {
  OperatorSuiteConfig suite;
  suite.enable_formulaic = false;
  const auto p = ts::seed_problem(6, "f");
  Rng rng(1);
  const auto out = mutate(p, suite, rng);
  CHECK(out.noise_conditions.empty());
  CHECK_FALSE(out.trap_answer.has_value());
  CHECK_FALSE(out.narrative.misleading_sentences.empty());

  suite = {};
  suite.enable_linguistic = false;
  const auto out2 = mutate(p, suite, rng);
  CHECK(out2.narrative.misleading_sentences.empty());
  CHECK(out2.narrative.irrelevant_fragments.empty());
  CHECK_FALSE(out2.narrative.theme.has_value());

  OperatorSuiteConfig none;
  none.enable_formulaic = none.enable_linguistic = none.enable_crossover = false;
  CHECK_THROWS_AS(none.validate(), ConfigError);
}

TEST_CASE("crossover examples") {
  Rng rng(0);
  const auto p1 = ts::problem("a", ts::core({ts::eq({{1, 1}, {2, 1}}, 10), ts::eq({{1, 1}, {2, -1}}, 4)}, {7, 3}, 1));
  const auto p2 = ts::problem("b", ts::core({ts::eq({{1, 1}, {2, 1}}, 21), ts::eq({{1, 1}, {2, 2}}, 21)}, {21, 0}, 2));
  const auto c = crossover(p1, p2, rng);
  CHECK(c.bridge_ratio == algebra::Rational(3));
  CHECK(c.q1_answer == 7);
  CHECK(c.final_answer == p2.answer);
  CHECK(oracle::answer(c.part2.core) == oracle::Q(c.final_answer));
  CHECK(c.id == "a+b");

  const auto q1 = ts::problem("c", ts::core({ts::eq({{1, 1}, {2, 1}}, 8), ts::eq({{1, 1}, {2, -1}}, 2)}, {5, 3}, 1));
  const auto q2 = ts::problem("d", ts::core({ts::eq({{1, 1}, {2, 1}}, 5), ts::eq({{1, 1}, {2, -1}}, 5)}, {5, 0}, 1));
  CHECK(crossover(q1, q2, rng).bridge_ratio == algebra::Rational(1));

  auto zero = ts::problem("z", ts::core({ts::eq({{1, 1}, {2, 1}}, 3), ts::eq({{1, 1}, {2, -1}}, -3)}, {0, 3}, 1));
  CHECK_THROWS_AS(crossover(zero, p2, rng), OperatorSkip);
}

TEST_CASE("crossover reconstructs the bridged rhs exactly") {
  for (int i = 0; i < 100; ++i) {
    const auto a = ts::seed_problem(8, "a" + std::to_string(i));
    const auto b = ts::seed_problem(8, "b" + std::to_string(i));
    Rng rng(static_cast<std::uint64_t>(i));
    const auto c = crossover(a, b, rng);
    const auto& bridged = c.part2.core.conditions.at(c.bridged_condition_index);
    CHECK(c.bridge_ratio * algebra::Rational(c.q1_answer) == algebra::Rational(bridged.rhs));
    CHECK(validate(BenchmarkItem{c, {}, {}, {}}).empty());
  }
}

TEST_CASE("random pairing is a disjoint cover") {
  for (std::size_t n : {0u, 1u, 2u, 7u, 10u}) {
    Rng rng(n);
    const auto pairing = random_pairing(n, rng);
    std::set<std::size_t> seen;
    for (auto [a, b] : pairing.pairs) {
      CHECK(seen.insert(a).second);
      CHECK(seen.insert(b).second);
    }
    if (pairing.leftover) CHECK(seen.insert(*pairing.leftover).second);
    CHECK(seen.size() == n);
    CHECK(pairing.leftover.has_value() == (n % 2 == 1));
  }
}

}  // TEST_SUITE
