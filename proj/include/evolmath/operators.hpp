#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evolmath/model.hpp"
#include "evolmath/resources.hpp"
#include "evolmath/rng.hpp"
#include "evolmath/seedgen.hpp"

namespace evolmath {

struct OperatorSuiteConfig {
  bool enable_formulaic = true;   // approximate replacement, useless, misleading math
  bool enable_linguistic = true;  // misleading text, background, irrelevant topic
  bool enable_crossover = true;
  std::size_t useless_count = 2;
  std::size_t misleading_math_count = 1;
  std::size_t misleading_text_count = 1;
  std::size_t irrelevant_count = 1;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError when every operator group is disabled.
  void validate() const;
};

/// The non-target variable a step-by-step solver pins down first: the one
/// determined by the smallest subset of core equations (subsets visited by
/// size, then lexicographically; ties go to the earlier variable).
std::optional<VarId> find_shortcut_variable(const AlgebraicCore& core);

/// Operator 1.  Adds `target ~ m*s + d` (m in {1,2}, |d| <= 5) over the
/// shortcut variable s and records the trap answer m*s + d, which always
/// differs from the true answer.  Throws OperatorSkip when no shortcut exists,
/// a pseudo-condition is already present, or resampling runs out.
Problem approximate_replacement(const Problem& p, Rng& rng);

/// Operator 2.  k fresh variables with their own preset values and k valid
/// equations over them; the core is untouched.
Problem add_useless_conditions(const Problem& p, std::size_t k, Rng& rng,
                               const SeedConfig& ranges = {}, const Banks& banks = Banks::builtin());

/// Operator 3.  k hedged conditions over core variables whose rhs is off by
/// a nonzero perturbation in +-[2, 7].
Problem add_misleading_math(const Problem& p, std::size_t k, Rng& rng);

/// Operator 4.
Problem add_misleading_text(const Problem& p, std::size_t k, Rng& rng,
                            const Banks& banks = Banks::builtin());

/// Operator 5.  Picks a theme with enough entities and names every variable.
Problem add_background(const Problem& p, Rng& rng, const Banks& banks = Banks::builtin());

/// Operator 6.
Problem add_irrelevant_topic(const Problem& p, std::size_t k, Rng& rng,
                             const Banks& banks = Banks::builtin());

/// Joins p1 and p2: one core rhs of p2 is withheld and expressed as
/// bridge_ratio * p1.answer.  Throws OperatorSkip when p1.answer is 0.
CompoundProblem crossover(const Problem& p1, const Problem& p2, Rng& rng);

/// Enabled mutation operators in fixed order: approximate replacement,
/// useless, misleading math, background, misleading text, irrelevant topic.
/// Skipped operators are reported through `skipped` and leave p unchanged.
Problem mutate(const Problem& p, const OperatorSuiteConfig& cfg, Rng& rng,
               const Banks& banks = Banks::builtin(), const SeedConfig& ranges = {},
               std::vector<std::string>* skipped = nullptr);

struct Pairing {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::optional<std::size_t> leftover;
};

/// Uniform random disjoint pairing of indices [0, n).
Pairing random_pairing(std::size_t n, Rng& rng);

}  // namespace evolmath
