#include <doctest.h>

#include "evolmath/error.hpp"
#include "evolmath/seedgen.hpp"
#include "../support/builders.hpp"
#include "../support/oracle.hpp"

using namespace evolmath;
namespace ts = testing_support;

TEST_SUITE("seedgen") {

TEST_CASE("two-variable seed solves to its preset solution") {
  SeedConfig cfg;
  cfg.num_variables = 2;
  cfg.num_equations = 2;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng(s);
    const auto core = generate_seed(cfg, rng);
    REQUIRE(core.conditions.size() == 2);
    const auto sol = oracle::solve(core);
    REQUIRE(sol.has_value());
    for (const auto& [v, value] : core.solution) CHECK(sol->at(v) == oracle::Q(value));
  }
}

TEST_CASE("configuration preconditions") {
  SeedConfig cfg;
  cfg.num_variables = 2;
  cfg.num_equations = 2;
  cfg.sparsity = 3;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  Rng rng(0);
  CHECK_THROWS_AS(generate_seed(cfg, rng), ConfigError);

  SeedConfig empty_range;
  empty_range.solution_range = {5, 1};
  CHECK_THROWS_AS(empty_range.validate(), ConfigError);

  SeedConfig zero_coefs;
  zero_coefs.coefficient_range = {0, 0};
  CHECK_THROWS_AS(zero_coefs.validate(), ConfigError);
}

TEST_CASE("exhausted retries raise a generation failure") {
  SeedConfig cfg;
  cfg.num_variables = 2;
  cfg.num_equations = 2;
  cfg.solution_range = {1, 1};
  cfg.coefficient_range = {1, 1};
  cfg.max_retries = 25;
  Rng rng(4);
  try {
    generate_seed(cfg, rng);
    FAIL("expected GenerationFailure");
  } catch (const GenerationFailure& e) {
    CHECK(e.attempts() == 25);
  }
}

TEST_CASE("full-rank check") {
  CHECK_FALSE(full_rank_check(ts::core({ts::eq({{1, 1}, {2, 1}}, 8), ts::eq({{1, 2}, {2, 2}}, 16)}, {5, 3}, 1)));
  CHECK(full_rank_check(ts::two_by_two()));
}

TEST_CASE("necessity check") {
  CHECK(necessity_check(ts::two_by_two(1)));
  const auto diagonal = ts::core({ts::eq({{1, 1}}, 5), ts::eq({{2, 1}}, 3)}, {5, 3}, 1);
  CHECK_FALSE(necessity_check(diagonal));
  CHECK(oracle::every_condition_necessary(ts::two_by_two(1)));
  CHECK_FALSE(oracle::every_condition_necessary(diagonal));
  CHECK(necessity_check(ts::core({ts::eq({{1, 2}}, 10)}, {5}, 1)));
  CHECK_THROWS_AS(necessity_check(ts::core({ts::eq({{1, 1}, {2, 1}}, 8)}, {5, 3}, 1)), InvalidInput);
}

TEST_CASE("seeds at the default configuration pass every check") {
  const SeedConfig cfg;
  for (int i = 0; i < 200; ++i) {
    Rng rng(derive_seed(2024, "seed:" + std::to_string(i)));
    const auto core = generate_seed(cfg, rng);
    CHECK(core.variables.size() == 5);
    CHECK(core.conditions.size() == 5);
    for (const auto& cond : core.conditions) {
      CHECK(cond.terms.size() == 2);
      for (const auto& [v, coef] : cond.terms) {
        CHECK(coef != 0);
        CHECK(cfg.coefficient_range.contains(coef));
      }
    }
    for (const auto& [v, value] : core.solution) CHECK(cfg.solution_range.contains(value));
    CHECK(oracle::full_rank(core));
    CHECK(oracle::every_condition_necessary(core));
    CHECK(validate(ts::problem("s", core)).empty());
  }
}

TEST_CASE("same stream, same seed") {
  Rng a(77), b(77);
  CHECK(generate_seed(SeedConfig{}, a) == generate_seed(SeedConfig{}, b));
}

TEST_CASE("draw_nonzero never returns zero") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(draw_nonzero({-1, 1}, rng) != 0);
}

TEST_CASE("generate_system over fresh ids") {
  std::vector<VarId> vars{VarId{10}, VarId{11}};
  SeedConfig cfg;
  cfg.num_variables = 2;
  cfg.num_equations = 2;
  Rng rng(9);
  const auto sys = generate_system(vars, cfg, false, rng);
  CHECK(sys.variables == vars);
  CHECK(oracle::full_rank(sys));
}

}  // TEST_SUITE
