#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "evolmath/model.hpp"
#include "evolmath/rng.hpp"
#include "evolmath/seedgen.hpp"

namespace testing_support {

using evolmath::AlgebraicCore;
using evolmath::LinearCondition;
using evolmath::Problem;
using evolmath::VarId;

inline VarId v(int i) { return VarId{i}; }

inline LinearCondition eq(std::vector<std::pair<int, std::int64_t>> terms, std::int64_t rhs) {
  LinearCondition c;
  for (auto [var, coef] : terms) c.terms[VarId{var}] = coef;
  c.rhs = rhs;
  return c;
}

/// Core over v1..vn with the given conditions, solution and target.
inline AlgebraicCore core(std::vector<LinearCondition> conds, std::vector<std::int64_t> solution, int target) {
  AlgebraicCore c;
  for (std::size_t i = 0; i < solution.size(); ++i) {
    c.variables.push_back(VarId{static_cast<int>(i) + 1});
    c.solution[VarId{static_cast<int>(i) + 1}] = solution[i];
  }
  c.conditions = std::move(conds);
  c.target = VarId{target};
  return c;
}

/// x + y = 8, x - y = 2 with solution (5, 3).
inline AlgebraicCore two_by_two(int target = 1) {
  return core({eq({{1, 1}, {2, 1}}, 8), eq({{1, 1}, {2, -1}}, 2)}, {5, 3}, target);
}

inline Problem problem(std::string id, AlgebraicCore c) {
  Problem p;
  p.id = std::move(id);
  p.answer = c.solution.at(c.target);
  p.core = std::move(c);
  return p;
}

/// Seed problem at the default configuration, drawn from its own stream.
inline Problem seed_problem(std::uint64_t seed, const std::string& id,
                            const evolmath::SeedConfig& cfg = {}) {
  evolmath::Rng rng(evolmath::derive_seed(seed, "seed:" + id));
  return problem(id, evolmath::generate_seed(cfg, rng));
}

}  // namespace testing_support
