#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "evolmath/model.hpp"
#include "evolmath/rng.hpp"

namespace evolmath {

struct IntRange {
  std::int64_t lo = 0;
  std::int64_t hi = 0;

  bool contains(std::int64_t v) const noexcept { return lo <= v && v <= hi; }
  bool empty() const noexcept { return lo > hi; }
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// Uniform draw from a range with zero removed.
std::int64_t draw_nonzero(const IntRange& range, Rng& rng);

struct SeedConfig {
  int num_variables = 5;
  int num_equations = 5;
  IntRange solution_range{1, 20};
  int sparsity = 2;  // variables per equation
  IntRange coefficient_range{-9, 9};
  std::size_t max_retries = 10000;
  std::uint64_t rng_seed = 0;

  /// Throws ConfigError describing the first broken constraint.
  void validate() const;
};

/// Reverse-engineered seed: the solution is drawn first, each equation gets
/// exactly `sparsity` variables and its rhs is the exact dot product with the
/// solution.  Candidates failing the full-rank or necessity checks are
/// redrawn.  Throws GenerationFailure once max_retries attempts are spent.
AlgebraicCore generate_seed(const SeedConfig& cfg, Rng& rng);

/// Same construction over caller-chosen variable ids; necessity is optional.
/// Used for the fresh variables of useless noise conditions.
AlgebraicCore generate_system(std::span<const VarId> variables, const SeedConfig& cfg,
                              bool require_necessity, Rng& rng);

/// rank(A) == number of variables.
bool full_rank_check(const AlgebraicCore& core);

/// For every condition i, the target's unit vector is outside the row space
/// of A without row i, i.e. dropping any one equation leaves the target
/// undetermined.  Throws InvalidInput if the core is not full rank.
bool necessity_check(const AlgebraicCore& core);

}  // namespace evolmath
