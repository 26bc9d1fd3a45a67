#include <doctest.h>

#include <algorithm>
#include <limits>

#include "evolmath/error.hpp"
#include "evolmath/evolve.hpp"
#include "../support/oracle.hpp"

using namespace evolmath;

namespace {

EvolutionConfig small_config(std::size_t population = 4) {
  EvolutionConfig cfg;
  cfg.population_size = population;
  cfg.offline_referee = 5;
  cfg.rng_seed = 7;
  cfg.max_generations = 1;
  return cfg;
}

std::size_t count_tag(const Problem& p, ConditionTag tag) {
  return static_cast<std::size_t>(std::count_if(p.noise_conditions.begin(), p.noise_conditions.end(),
                                                [&](const LinearCondition& c) { return c.tag == tag; }));
}

std::vector<const Problem*> parts(const BenchmarkItem& item) {
  if (item.is_compound()) return {&item.compound().part1, &item.compound().part2};
  return {&item.atomic()};
}

ImportedCore import_xy() {
  ImportedCore c;
  c.source_id = "gsm-1";
  c.equations = {{{{"x", 1}}, Relation::Equal, 5}, {{{"y", 1}, {"x", -1}}, Relation::Equal, 3}};
  c.solution = {{"x", 5}, {"y", 8}};
  c.target = "y";
  c.original_text = "Ann has 5 apples. Bob has 3 more than Ann. How many does Bob have?";
  return c;
}

}  // namespace

TEST_SUITE("evolve") {

TEST_CASE("modes") {
  for (auto m : {AblationMode::Full, AblationMode::NoFormulaic, AblationMode::NoLinguistic, AblationMode::NoCrossover,
                 AblationMode::TwoGen}) {
    CHECK(parse_ablation_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_ablation_mode("three_gen"), ConfigError);
  EvolutionConfig cfg;
  cfg.max_generations = 7;
  CHECK(apply_mode(cfg, AblationMode::TwoGen).max_generations == 2);
  CHECK(apply_mode(cfg, AblationMode::Full).max_generations == 1);
  CHECK_FALSE(apply_mode(cfg, AblationMode::NoCrossover).suite.enable_crossover);
  CHECK_FALSE(apply_mode(cfg, AblationMode::NoFormulaic).suite.enable_formulaic);
  CHECK_FALSE(apply_mode(cfg, AblationMode::NoLinguistic).suite.enable_linguistic);
}

TEST_CASE("config JSON round trip") {
  auto cfg = small_config();
  cfg.percentile = std::nullopt;
  cfg.threshold = std::numeric_limits<double>::infinity();
  cfg.mode = AblationMode::NoLinguistic;
  cfg.seed_config.solution_range = {2, 30};
  const auto back = EvolutionConfig::from_json(cfg.to_json());
  CHECK(back.to_json() == cfg.to_json());
  CHECK(back.threshold == cfg.threshold);
  CHECK_FALSE(back.percentile.has_value());
  CHECK(back.seed_config.solution_range == cfg.seed_config.solution_range);
}

TEST_CASE("a run needs a referee") {
  auto cfg = small_config();
  cfg.offline_referee.reset();
  CHECK_THROWS_AS(run(cfg), ConfigError);
  auto polish = small_config();
  polish.polish = true;
  CHECK_THROWS_AS(run(polish), ConfigError);
}

TEST_CASE("one generation emits the population at generation 1") {
  const auto result = run(small_config());
  CHECK(result.items.size() == 4);
  for (const auto& item : result.items) {
    CHECK(item.generation() == 1);
    CHECK(validate(item).empty());
    REQUIRE(item.fitness.has_value());
    CHECK(item.draft_text().has_value());
  }
  CHECK(std::is_sorted(result.items.begin(), result.items.end(),
                       [](const BenchmarkItem& a, const BenchmarkItem& b) { return a.id() < b.id(); }));
  CHECK(is_header(result.header));
}

TEST_CASE("an unreachable threshold re-evolves everything once") {
  auto cfg = small_config(6);
  cfg.max_generations = 2;
  cfg.threshold = std::numeric_limits<double>::infinity();
  const auto result = run(cfg);
  REQUIRE_FALSE(result.items.empty());
  for (const auto& item : result.items) {
    CHECK(item.generation() == 2);
    CHECK_FALSE(item.fitness->selected);
    for (const auto* p : parts(item)) {
      for (const auto& l : p->lineage) CHECK(l.generation <= 2);
    }
  }
  REQUIRE(result.stats.rejected_per_generation.size() == 2);
  CHECK(result.stats.rejected_per_generation[0] == result.items.size());
}

TEST_CASE("runs are deterministic and independent of the job count") {
  auto cfg = small_config(6);
  cfg.max_generations = 2;
  const auto a = run(cfg);
  cfg.jobs = 4;
  const auto b = run(cfg);
  CHECK(benchmark_to_string(a.header, a.items) == benchmark_to_string(b.header, b.items));
  cfg.rng_seed = 8;
  const auto c = run(cfg);
  CHECK(benchmark_to_string(a.header, a.items) != benchmark_to_string(c.header, c.items));
}

TEST_CASE("stored answers match the oracle") {
  auto cfg = small_config(8);
  cfg.max_generations = 2;
  for (const auto& item : run(cfg).items) {
    for (const auto* p : parts(item)) CHECK(oracle::answer(p->core) == oracle::Q(p->answer));
    if (item.trap_answer()) CHECK(*item.trap_answer() != item.answer());
  }
}

TEST_CASE("ablation structure") {
  auto cfg = small_config(6);
  const auto no_co = ablation_run(cfg, AblationMode::NoCrossover);
  for (const auto& item : no_co.items) CHECK_FALSE(item.is_compound());

  const auto no_fm = ablation_run(cfg, AblationMode::NoFormulaic);
  for (const auto& item : no_fm.items) {
    for (const auto* p : parts(item)) CHECK(p->noise_conditions.empty());
  }

  const auto no_lm = ablation_run(cfg, AblationMode::NoLinguistic);
  for (const auto& item : no_lm.items) {
    for (const auto* p : parts(item)) {
      CHECK(p->narrative.misleading_sentences.empty());
      CHECK(p->narrative.irrelevant_fragments.empty());
      CHECK_FALSE(p->narrative.theme.has_value());
    }
  }

  const auto full = ablation_run(cfg, AblationMode::Full);
  for (const auto& item : full.items) {
    for (const auto* p : parts(item)) CHECK(count_tag(*p, ConditionTag::ShortcutPseudo) <= 1);
  }

  cfg.threshold = std::numeric_limits<double>::infinity();
  const auto two = ablation_run(cfg, AblationMode::TwoGen);
  CHECK(std::any_of(two.items.begin(), two.items.end(), [](const BenchmarkItem& i) { return i.generation() == 2; }));
  for (const auto& item : two.items) CHECK(item.generation() <= 2);
  CHECK(two.header["evolmath_header"]["config"]["mode"] == "two_gen");
}

TEST_CASE("partition by difficulty") {
  auto cfg = small_config(6);
  const auto result = run(cfg);
  const auto part = partition_by_difficulty(result.items);
  CHECK(part.easy.size() + part.hard.size() == result.items.size());
  for (const auto& e : part.easy) CHECK_FALSE(e.fitness->selected);
  for (const auto& h : part.hard) CHECK(h.fitness->selected);

  cfg.threshold = std::numeric_limits<double>::infinity();
  CHECK(partition_by_difficulty(run(cfg).items).hard.empty());

  cfg.threshold = -std::numeric_limits<double>::infinity();
  cfg.percentile = std::nullopt;
  CHECK(partition_by_difficulty(run(cfg).items).easy.empty());

  std::vector<BenchmarkItem> bare(1);
  CHECK_THROWS_AS(partition_by_difficulty(bare), InvalidInput);
}

TEST_CASE("imported core with a derived target") {
  const auto p = problem_from_import(import_xy());
  CHECK(p.answer == 8);
  CHECK(oracle::answer(p.core) == oracle::Q(8));
  CHECK(p.id == "gsm-1");
}

TEST_CASE("broken imports") {
  auto bad = import_xy();
  bad.solution["y"] = 9;
  CHECK_THROWS_AS(problem_from_import(bad), ValidationError);

  auto singular = import_xy();
  singular.equations[1] = {{{"x", 2}}, Relation::Equal, 10};
  CHECK_THROWS_AS(problem_from_import(singular), ValidationError);

  auto unknown = import_xy();
  unknown.target = "z";
  CHECK_THROWS_AS(problem_from_import(unknown), ValidationError);
}

TEST_CASE("import parsing") {
  const std::string text =
      R"({"source_id":"a","equations":[{"terms":{"x":1},"rhs":5},{"terms":{"y":1,"x":-1},"relation":"equal","rhs":3}],"solution":{"x":5,"y":8},"target":"y"})"
      "\n\n";
  const auto cores = parse_imports(text);
  REQUIRE(cores.size() == 1);
  CHECK(cores[0].equations[1].terms.size() == 2);
  CHECK(cores[0].equations[1].relation == Relation::Equal);
  CHECK(parse_imports("").empty());
  CHECK_THROWS_AS(parse_imports("{\"source_id\":"), ParseError);
}

TEST_CASE("evolving imports") {
  auto cfg = small_config();
  std::vector<ImportedCore> cores{import_xy()};
  auto second = import_xy();
  second.source_id = "gsm-2";
  cores.push_back(second);
  auto dup = import_xy();
  cores.push_back(dup);
  auto broken = import_xy();
  broken.source_id = "gsm-3";
  broken.solution["x"] = 6;
  cores.push_back(broken);

  const auto result = evolve_imported(cores, cfg);
  CHECK(result.import_rejections.size() == 2);
  CHECK(result.header["evolmath_header"]["config"]["origin"] == "import");
  REQUIRE_FALSE(result.items.empty());
  for (const auto& item : result.items) {
    CHECK(validate(item).empty());
    CHECK(item.answer() == 8);
  }

  const auto empty = evolve_imported({}, cfg);
  CHECK(empty.items.empty());
  CHECK(empty.import_rejections.empty());
}

}  // TEST_SUITE
