#include "evolmath/seedgen.hpp"

#include <algorithm>
#include <string>

#include "evolmath/error.hpp"

namespace evolmath {

using algebra::Rational;

std::int64_t draw_nonzero(const IntRange& range, Rng& rng) {
  const bool has_zero = range.contains(0);
  const std::int64_t count = range.hi - range.lo + 1 - (has_zero ? 1 : 0);
  if (range.empty() || count <= 0) throw ConfigError("range has no nonzero values");
  std::int64_t v = range.lo + rng.uniform_int(0, count - 1);
  if (has_zero && v >= 0) ++v;
  return v;
}

void SeedConfig::validate() const {
  if (num_variables < 1) throw ConfigError("num_variables must be at least 1");
  if (num_equations != num_variables) {
    throw ConfigError("only square systems are supported: num_equations (" +
                      std::to_string(num_equations) + ") must equal num_variables (" +
                      std::to_string(num_variables) + ")");
  }
  if (sparsity < 1) throw ConfigError("sparsity must be at least 1");
  if (sparsity > num_variables) {
    throw ConfigError("sparsity (" + std::to_string(sparsity) + ") exceeds num_variables (" +
                      std::to_string(num_variables) + ")");
  }
  if (solution_range.empty()) throw ConfigError("solution range is empty");
  if (coefficient_range.empty() ||
      (coefficient_range.lo == 0 && coefficient_range.hi == 0)) {
    throw ConfigError("coefficient range has no nonzero values");
  }
  if (max_retries == 0) throw ConfigError("max_retries must be positive");
}

namespace {

AlgebraicCore draw_candidate(std::span<const VarId> vars, const SeedConfig& cfg, Rng& rng) {
  AlgebraicCore core;
  core.variables.assign(vars.begin(), vars.end());
  for (const auto& v : vars) {
    core.solution[v] = rng.uniform_int(cfg.solution_range.lo, cfg.solution_range.hi);
  }
  core.target = vars[rng.index(vars.size())];
  const auto sparsity = static_cast<std::size_t>(cfg.sparsity);
  for (std::size_t e = 0; e < vars.size(); ++e) {
    LinearCondition cond;
    for (std::size_t idx : rng.sample_indices(vars.size(), sparsity)) {
      cond.terms[vars[idx]] = draw_nonzero(cfg.coefficient_range, rng);
    }
    std::int64_t rhs = 0;
    for (const auto& [v, coef] : cond.terms) rhs += coef * core.solution.at(v);
    cond.rhs = rhs;
    core.conditions.push_back(std::move(cond));
  }
  return core;
}

}  // namespace

AlgebraicCore generate_system(std::span<const VarId> variables, const SeedConfig& cfg,
                              bool require_necessity, Rng& rng) {
  if (variables.empty()) throw InvalidInput("generate_system: no variables");
  SeedConfig local = cfg;
  local.num_variables = local.num_equations = static_cast<int>(variables.size());
  local.validate();
  for (std::size_t attempt = 1; attempt <= local.max_retries; ++attempt) {
    AlgebraicCore core = draw_candidate(variables, local, rng);
    if (!full_rank_check(core)) continue;
    if (require_necessity && !necessity_check(core)) continue;
    return core;
  }
  throw GenerationFailure("seed generation exhausted " + std::to_string(local.max_retries) +
                              " attempts without a full-rank" +
                              (require_necessity ? std::string(", necessary") : std::string()) +
                              " system",
                          local.max_retries);
}

AlgebraicCore generate_seed(const SeedConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<VarId> vars;
  for (int i = 1; i <= cfg.num_variables; ++i) vars.push_back(VarId{i});
  return generate_system(vars, cfg, true, rng);
}

bool full_rank_check(const AlgebraicCore& core) {
  if (core.variables.empty() || core.conditions.size() < core.variables.size()) return false;
  return algebra::rank(core.coefficient_matrix()) == core.variables.size();
}

bool necessity_check(const AlgebraicCore& core) {
  if (!full_rank_check(core)) throw InvalidInput("necessity_check: core is not full rank");
  const auto target = std::find(core.variables.begin(), core.variables.end(), core.target);
  if (target == core.variables.end()) throw InvalidInput("necessity_check: target is not a core variable");

  std::vector<Rational> unit(core.variables.size());
  unit[static_cast<std::size_t>(target - core.variables.begin())] = Rational(1);
  const auto a = core.coefficient_matrix();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (algebra::in_row_space(unit, a.without_row(i))) return false;
  }
  return true;
}

}  // namespace evolmath
