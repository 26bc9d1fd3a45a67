#include "evolmath/evolve.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <memory>
#include <set>

#include <spdlog/spdlog.h>

#include "evolmath/error.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/parallel.hpp"
#include "evolmath/render.hpp"
#include "evolmath/rng.hpp"

namespace evolmath {

std::string_view to_string(AblationMode mode) noexcept {
  switch (mode) {
    case AblationMode::Full: return "full";
    case AblationMode::NoFormulaic: return "no_fm";
    case AblationMode::NoLinguistic: return "no_lm";
    case AblationMode::NoCrossover: return "no_co";
    case AblationMode::TwoGen: return "two_gen";
  }
  return "?";
}

AblationMode parse_ablation_mode(std::string_view name) {
  for (auto m : {AblationMode::Full, AblationMode::NoFormulaic, AblationMode::NoLinguistic,
                 AblationMode::NoCrossover, AblationMode::TwoGen}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown mode \"" + std::string(name) + "\" (expected full, no_fm, no_lm, no_co or two_gen)");
}

void EvolutionConfig::validate() const {
  if (population_size < 2) throw ConfigError("population size must be at least 2");
  if (max_generations < 1) throw ConfigError("max generations must be at least 1");
  if (std::isnan(threshold)) throw ConfigError("threshold must be a number");
  if (percentile && !(*percentile >= 0.0 && *percentile <= 100.0)) {
    throw ConfigError("percentile must lie in [0, 100]");
  }
  if (offline_referee && (*offline_referee < 0 || *offline_referee > 10)) {
    throw ConfigError("offline referee score must be in 0..10");
  }
  seed_config.validate();
  suite.validate();
}

namespace {

Json range_json(const IntRange& r) { return Json::array({r.lo, r.hi}); }

IntRange range_from_json(const Json& j) {
  return {j.at(0).get<std::int64_t>(), j.at(1).get<std::int64_t>()};
}

}  // namespace

Json EvolutionConfig::to_json() const {
  Json j;
  j["population_size"] = population_size;
  j["seed_config"] = {{"num_variables", seed_config.num_variables},
                      {"num_equations", seed_config.num_equations},
                      {"solution_range", range_json(seed_config.solution_range)},
                      {"sparsity", seed_config.sparsity},
                      {"coefficient_range", range_json(seed_config.coefficient_range)},
                      {"max_retries", seed_config.max_retries}};
  j["suite"] = {{"enable_formulaic", suite.enable_formulaic},
                {"enable_linguistic", suite.enable_linguistic},
                {"enable_crossover", suite.enable_crossover},
                {"useless_count", suite.useless_count},
                {"misleading_math_count", suite.misleading_math_count},
                {"misleading_text_count", suite.misleading_text_count},
                {"irrelevant_count", suite.irrelevant_count}};
  j["weights"] = weights;
  j["threshold"] = number_to_json(threshold);
  j["percentile"] = percentile ? Json(*percentile) : Json(nullptr);
  j["max_generations"] = max_generations;
  j["rng_seed"] = rng_seed;
  j["offline_referee"] = offline_referee ? Json(*offline_referee) : Json(nullptr);
  j["polish"] = polish;
  j["mode"] = mode ? Json(std::string(to_string(*mode))) : Json(nullptr);
  return j;
}

EvolutionConfig EvolutionConfig::from_json(const Json& j) {
  EvolutionConfig c;
  try {
    c.population_size = j.at("population_size").get<std::size_t>();
    const auto& s = j.at("seed_config");
    c.seed_config.num_variables = s.at("num_variables").get<int>();
    c.seed_config.num_equations = s.at("num_equations").get<int>();
    c.seed_config.solution_range = range_from_json(s.at("solution_range"));
    c.seed_config.sparsity = s.at("sparsity").get<int>();
    c.seed_config.coefficient_range = range_from_json(s.at("coefficient_range"));
    c.seed_config.max_retries = s.at("max_retries").get<std::size_t>();
    const auto& u = j.at("suite");
    c.suite.enable_formulaic = u.at("enable_formulaic").get<bool>();
    c.suite.enable_linguistic = u.at("enable_linguistic").get<bool>();
    c.suite.enable_crossover = u.at("enable_crossover").get<bool>();
    c.suite.useless_count = u.at("useless_count").get<std::size_t>();
    c.suite.misleading_math_count = u.at("misleading_math_count").get<std::size_t>();
    c.suite.misleading_text_count = u.at("misleading_text_count").get<std::size_t>();
    c.suite.irrelevant_count = u.at("irrelevant_count").get<std::size_t>();
    c.weights = j.at("weights").get<std::string>();
    c.threshold = number_from_json(j.at("threshold"));
    if (!j.at("percentile").is_null()) c.percentile = j.at("percentile").get<double>();
    else c.percentile.reset();
    c.max_generations = j.at("max_generations").get<int>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    if (!j.at("offline_referee").is_null()) c.offline_referee = j.at("offline_referee").get<int>();
    c.polish = j.at("polish").get<bool>();
    if (!j.at("mode").is_null()) c.mode = parse_ablation_mode(j.at("mode").get<std::string>());
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed evolution config: ") + e.what());
  }
  return c;
}

EvolutionConfig apply_mode(EvolutionConfig cfg, AblationMode mode) {
  cfg.suite.enable_formulaic = true;
  cfg.suite.enable_linguistic = true;
  cfg.suite.enable_crossover = true;
  cfg.max_generations = 1;
  switch (mode) {
    case AblationMode::Full: break;
    case AblationMode::NoFormulaic: cfg.suite.enable_formulaic = false; break;
    case AblationMode::NoLinguistic: cfg.suite.enable_linguistic = false; break;
    case AblationMode::NoCrossover: cfg.suite.enable_crossover = false; break;
    case AblationMode::TwoGen: cfg.max_generations = 2; break;
  }
  cfg.mode = mode;
  return cfg;
}

// ---------------------------------------------------------------------------

namespace {

constexpr std::string_view kPolishFallbackFlag = "polish-fallback";

class Pipeline {
 public:
  Pipeline(const EvolutionConfig& cfg, Gateway* gateway, const Banks& banks)
      : cfg_(cfg), gateway_(gateway), banks_(banks), weights_(load_weights(cfg.weights)) {
    cfg_.validate();
    if (cfg_.offline_referee) {
      referee_ = std::make_unique<ConstantReferee>(*cfg_.offline_referee);
    } else if (gateway_) {
      referee_ = std::make_unique<GatewayReferee>(*gateway_);
    } else {
      throw ConfigError("no referee available: configure a gateway or an offline referee score");
    }
    if (cfg_.polish && !gateway_) throw ConfigError("polish requested but no gateway is configured");
  }

  RunResult evolve(std::vector<Problem> initial, Json header) {
    parallel_for(initial.size(), cfg_.jobs,
                 [&](std::size_t i) { initial[i] = mutate_problem(std::move(initial[i]), 1); });
    std::vector<BenchmarkItem> items = cross(std::move(initial), 1);
    render(items, all_indices(items.size()));
    Selection sel = score(items);

    for (int gen = 2; gen <= cfg_.max_generations; ++gen) {
      if (sel.rejected.empty()) break;
      stats_.rejected_per_generation.push_back(sel.rejected.size());
      spdlog::info("generation {}: re-evolving {} of {} items", gen, sel.rejected.size(), items.size());
      items = reevolve(std::move(items), sel.rejected, gen);
      sel = score(items);
    }
    stats_.rejected_per_generation.push_back(sel.rejected.size());

    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.id() < b.id(); });
    for (const auto& item : items) {
      if (auto issues = validate(item); !issues.empty()) {
        throw ValidationError("evolved item " + item.id() + " is invalid: " + issues.front());
      }
    }
    RunStats stats = stats_;
    stats.operator_skips = operator_skips_.load();
    stats.polish_fallbacks = polish_fallbacks_.load();
    return {std::move(header), std::move(items), {}, std::move(stats)};
  }

 private:
  static std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = i;
    return out;
  }

  Problem mutate_problem(Problem p, int gen) {
    p.generation = gen;
    Rng rng(derive_seed(cfg_.rng_seed, "mutate:" + std::to_string(gen) + ":" + p.id));
    std::vector<std::string> skipped;
    Problem out = mutate(p, cfg_.suite, rng, banks_, cfg_.seed_config, &skipped);
    for (const auto& s : skipped) spdlog::debug("{}: skipped {}", p.id, s);
    operator_skips_.fetch_add(skipped.size());
    return out;
  }

  // Disjoint random pairs become compounds; leftovers and unbridgeable pairs
  // stay atomic.
  std::vector<BenchmarkItem> cross(std::vector<Problem> atomics, int gen) {
    std::vector<BenchmarkItem> out;
    if (!cfg_.suite.enable_crossover) {
      for (auto& p : atomics) out.push_back(BenchmarkItem{std::move(p), {}, {}, {}});
      return out;
    }
    std::sort(atomics.begin(), atomics.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    Rng pair_rng(derive_seed(cfg_.rng_seed, "pair:" + std::to_string(gen)));
    const Pairing pairing = random_pairing(atomics.size(), pair_rng);
    for (const auto& [i, j] : pairing.pairs) {
      const Problem& a = atomics[i];
      const Problem& b = atomics[j];
      Rng rng(derive_seed(cfg_.rng_seed, "crossover:" + std::to_string(gen) + ":" + a.id + "+" + b.id));
      try {
        out.push_back(BenchmarkItem{crossover(a, b, rng), {}, {}, {}});
        continue;
      } catch (const OperatorSkip& e) {
        spdlog::debug("crossover {}+{} skipped: {}", a.id, b.id, e.what());
      }
      try {
        out.push_back(BenchmarkItem{crossover(b, a, rng), {}, {}, {}});
        continue;
      } catch (const OperatorSkip& e) {
        spdlog::debug("crossover {}+{} skipped: {}", b.id, a.id, e.what());
      }
      ++stats_.crossover_skips;
      out.push_back(BenchmarkItem{a, {}, {}, {}});
      out.push_back(BenchmarkItem{b, {}, {}, {}});
    }
    if (pairing.leftover) out.push_back(BenchmarkItem{atomics[*pairing.leftover], {}, {}, {}});
    return out;
  }

  void render(std::vector<BenchmarkItem>& items, const std::vector<std::size_t>& which) {
    parallel_for(which.size(), cfg_.jobs, [&](std::size_t k) {
      auto& item = items[which[k]];
      const std::string draft = render_draft(item, banks_);
      item.draft_text() = draft;
      item.final_text().reset();
      std::erase(item.flags, std::string(kPolishFallbackFlag));
      if (!cfg_.polish) return;
      const auto entities = entity_phrases(item);
      auto outcome = evolmath::polish(draft, *gateway_, entities);
      if (outcome.accepted) {
        item.final_text() = std::move(outcome.text);
      } else {
        item.add_flag(std::string(kPolishFallbackFlag));
        polish_fallbacks_.fetch_add(1);
      }
    });
  }

  Selection score(std::vector<BenchmarkItem>& items) {
    return score_population(items, weights_, *referee_, {cfg_.threshold, cfg_.percentile}, cfg_.jobs);
  }

  std::vector<BenchmarkItem> reevolve(std::vector<BenchmarkItem> items, const std::vector<std::size_t>& rejected,
                                      int gen) {
    const std::set<std::size_t> rejected_set(rejected.begin(), rejected.end());
    std::vector<BenchmarkItem> next;
    std::vector<Problem> atomics;
    std::vector<BenchmarkItem> compounds;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!rejected_set.contains(i)) {
        next.push_back(std::move(items[i]));
      } else if (items[i].is_compound()) {
        compounds.push_back(std::move(items[i]));
      } else {
        atomics.push_back(std::move(items[i].atomic()));
      }
    }

    // Each item draws from its own stream, so the loop order is irrelevant.
    std::vector<Problem> mutated(atomics.size());
    parallel_for(atomics.size(), cfg_.jobs,
                 [&](std::size_t k) { mutated[k] = mutate_problem(std::move(atomics[k]), gen); });
    parallel_for(compounds.size(), cfg_.jobs, [&](std::size_t k) {
      auto& c = compounds[k].compound();
      c.part1 = mutate_problem(std::move(c.part1), gen);
      c.part2 = mutate_problem(std::move(c.part2), gen);
      c.generation = gen;
    });

    std::vector<BenchmarkItem> fresh = cross(std::move(mutated), gen);
    for (auto& c : compounds) {
      c.features.reset();
      c.fitness.reset();
      fresh.push_back(std::move(c));
    }
    const std::size_t first = next.size();
    for (auto& f : fresh) next.push_back(std::move(f));
    std::vector<std::size_t> which;
    for (std::size_t i = first; i < next.size(); ++i) which.push_back(i);
    render(next, which);
    return next;
  }

  EvolutionConfig cfg_;
  Gateway* gateway_;
  const Banks& banks_;
  WeightVector weights_;
  std::unique_ptr<Referee> referee_;
  RunStats stats_;
  std::atomic<std::size_t> operator_skips_{0};
  std::atomic<std::size_t> polish_fallbacks_{0};
};

std::string seed_id(std::size_t i, std::size_t n) {
  const std::size_t width = std::max<std::size_t>(5, std::to_string(n).size());
  std::string digits = std::to_string(i + 1);
  return "s" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

RunResult run(const EvolutionConfig& cfg, Gateway* gateway, const Banks& banks) {
  Pipeline pipeline(cfg, gateway, banks);
  const std::size_t n = cfg.suite.enable_crossover ? 2 * cfg.population_size : cfg.population_size;
  std::vector<Problem> seeds(n);
  parallel_for(n, cfg.jobs, [&](std::size_t i) {
    Problem& p = seeds[i];
    p.id = seed_id(i, n);
    Rng rng(derive_seed(cfg.rng_seed, "seed:" + p.id));
    p.core = generate_seed(cfg.seed_config, rng);
    p.answer = p.core.solution.at(p.core.target);
  });
  spdlog::info("generated {} seeds", n);
  return pipeline.evolve(std::move(seeds), make_header("benchmark", cfg.to_json()));
}

RunResult ablation_run(const EvolutionConfig& cfg, AblationMode mode, Gateway* gateway, const Banks& banks) {
  return run(apply_mode(cfg, mode), gateway, banks);
}

DifficultyPartition partition_by_difficulty(std::vector<BenchmarkItem> items) {
  DifficultyPartition out;
  for (auto& item : items) {
    if (!item.fitness) throw InvalidInput("item " + item.id() + " has no fitness report");
    (item.fitness->selected ? out.hard : out.easy).push_back(std::move(item));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Relation import_relation(std::string s) {
  if (!s.empty()) {
    s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    for (std::size_t i = 1; i < s.size(); ++i) {
      s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
    }
  }
  return parse_relation(s);
}

}  // namespace

std::vector<ImportedCore> parse_imports(std::string_view text) {
  std::vector<ImportedCore> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      const Json j = Json::parse(line);
      ImportedCore c;
      c.source_id = j.at("source_id").get<std::string>();
      for (const auto& eq : j.at("equations")) {
        ImportedEquation e;
        for (const auto& [name, coef] : eq.at("terms").items()) e.terms.emplace_back(name, coef.get<std::int64_t>());
        e.relation = import_relation(eq.value("relation", std::string("Equal")));
        e.rhs = eq.at("rhs").get<std::int64_t>();
        c.equations.push_back(std::move(e));
      }
      for (const auto& [name, value] : j.at("solution").items()) c.solution[name] = value.get<std::int64_t>();
      c.target = j.at("target").get<std::string>();
      c.original_text = j.value("original_text", std::string());
      out.push_back(std::move(c));
    } catch (const Json::exception& e) {
      throw ParseError("import line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ParseError& e) {
      throw ParseError("import line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

Problem problem_from_import(const ImportedCore& in) {
  const std::string where = "import " + in.source_id + ": ";
  if (in.source_id.empty()) throw ValidationError("import with empty source_id");
  if (in.equations.empty()) throw ValidationError(where + "no equations");

  std::map<std::string, VarId> ids;
  Problem p;
  p.id = in.source_id;
  for (std::size_t k = 0; k < in.equations.size(); ++k) {
    const auto& eq = in.equations[k];
    if (eq.relation != Relation::Equal) throw ValidationError(where + "equation " + std::to_string(k) + " is not an equality");
    LinearCondition cond;
    cond.rhs = eq.rhs;
    for (const auto& [name, coef] : eq.terms) {
      auto [it, inserted] = ids.try_emplace(name, VarId{static_cast<int>(ids.size()) + 1});
      if (inserted) p.core.variables.push_back(it->second);
      if (coef != 0) cond.terms[it->second] += coef;
    }
    std::erase_if(cond.terms, [](const auto& t) { return t.second == 0; });
    if (cond.terms.empty()) throw ValidationError(where + "equation " + std::to_string(k) + " has no variables");
    p.core.conditions.push_back(std::move(cond));
  }

  for (const auto& [name, value] : in.solution) {
    auto it = ids.find(name);
    if (it == ids.end()) throw ValidationError(where + "solution names unknown variable " + name);
    p.core.solution[it->second] = value;
  }
  for (const auto& [name, id] : ids) {
    if (!p.core.solution.contains(id)) throw ValidationError(where + "no solution value for " + name);
  }
  auto target = ids.find(in.target);
  if (target == ids.end()) throw ValidationError(where + "target " + in.target + " does not appear in any equation");
  p.core.target = target->second;

  if (!full_rank_check(p.core)) throw ValidationError(where + "rank-deficient system; the answer is not unique");
  for (std::size_t k = 0; k < p.core.conditions.size(); ++k) {
    if (p.core.conditions[k].lhs_at(p.core.solution) != algebra::Rational(p.core.conditions[k].rhs)) {
      throw ValidationError(where + "solution annotation violates equation " + std::to_string(k));
    }
  }
  p.answer = p.core.solution.at(p.core.target);
  if (auto issues = validate(p); !issues.empty()) throw ValidationError(where + issues.front());
  return p;
}

RunResult evolve_imported(std::span<const ImportedCore> cores, const EvolutionConfig& cfg, Gateway* gateway,
                          const Banks& banks) {
  Json config = cfg.to_json();
  config["origin"] = "import";
  Pipeline pipeline(cfg, gateway, banks);
  std::vector<Problem> problems;
  std::vector<std::string> rejections;
  std::set<std::string> seen;
  for (const auto& core : cores) {
    try {
      if (!seen.insert(core.source_id).second) throw ValidationError("duplicate source_id " + core.source_id);
      problems.push_back(problem_from_import(core));
    } catch (const ValidationError& e) {
      spdlog::warn("{}", e.what());
      rejections.emplace_back(e.what());
    }
  }
  if (problems.empty()) {
    spdlog::warn("no valid imported cores; the benchmark is empty");
    return {make_header("benchmark", std::move(config)), {}, std::move(rejections), {}};
  }
  auto result = pipeline.evolve(std::move(problems), make_header("benchmark", std::move(config)));
  result.import_rejections = std::move(rejections);
  return result;
}

}  // namespace evolmath
