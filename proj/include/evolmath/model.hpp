#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "evolmath/algebra/matrix.hpp"
#include "evolmath/algebra/rational.hpp"
#include "evolmath/feature_types.hpp"

namespace evolmath {

/// Abstract variable token, rendered as "v<index>".  Human-readable names
/// live only in the narrative layer.
struct VarId {
  int index = 0;

  std::string str() const { return "v" + std::to_string(index); }
  static VarId parse(std::string_view token);

  friend auto operator<=>(const VarId&, const VarId&) = default;
};

using Assignment = std::map<VarId, std::int64_t>;

enum class Relation { Equal, Approx, Similar };
enum class ConditionTag { Core, ShortcutPseudo, UselessNoise, MisleadingMath };

std::string_view to_string(Relation r) noexcept;
std::string_view to_string(ConditionTag t) noexcept;
Relation parse_relation(std::string_view s);
ConditionTag parse_tag(std::string_view s);

struct LinearCondition {
  std::map<VarId, std::int64_t> terms;
  Relation relation = Relation::Equal;
  std::int64_t rhs = 0;
  ConditionTag tag = ConditionTag::Core;

  /// Exact value of the left-hand side under an assignment.  Throws
  /// InvalidInput if a referenced variable is unassigned.
  algebra::Rational lhs_at(const Assignment& values) const;

  friend bool operator==(const LinearCondition&, const LinearCondition&) = default;
};

struct AlgebraicCore {
  std::vector<VarId> variables;
  std::vector<LinearCondition> conditions;
  Assignment solution;
  VarId target;

  /// Coefficient matrix with columns in `variables` order.
  algebra::RationalMatrix coefficient_matrix() const;
  std::vector<algebra::Rational> rhs_vector() const;

  friend bool operator==(const AlgebraicCore&, const AlgebraicCore&) = default;
};

/// Exact solution of a core's equation system, independent of the stored
/// solution.  Square systems go straight to solve_unique; over-determined
/// ones are reduced to an independent square subsystem and checked for
/// consistency.  Throws SingularSystem if the system is not uniquely solvable.
std::map<VarId, algebra::Rational> solve_core(const AlgebraicCore& core);

/// Target value computed by solve_core.
algebra::Rational oracle_answer(const AlgebraicCore& core);

struct NarrativeLayer {
  std::optional<std::string> theme;
  std::map<VarId, std::string> entity_names;
  std::vector<std::string> misleading_sentences;
  std::vector<std::string> irrelevant_fragments;

  friend bool operator==(const NarrativeLayer&, const NarrativeLayer&) = default;
};

struct LineageEntry {
  std::string op;
  std::string parent;  // parent id; "a+b" for crossover
  int generation = 0;

  friend bool operator==(const LineageEntry&, const LineageEntry&) = default;
};

struct Problem {
  std::string id;
  int generation = 0;
  std::vector<LineageEntry> lineage;
  AlgebraicCore core;
  std::vector<LinearCondition> noise_conditions;
  Assignment noise_solution;  // preset values of the fresh UselessNoise variables
  NarrativeLayer narrative;
  std::optional<std::string> draft_text;
  std::optional<std::string> final_text;
  std::int64_t answer = 0;
  std::optional<std::int64_t> trap_answer;

  /// Core variables followed by the fresh noise variables.
  std::vector<VarId> all_variables() const;
  std::size_t condition_count() const { return core.conditions.size() + noise_conditions.size(); }

  friend bool operator==(const Problem&, const Problem&) = default;
};

struct CompoundProblem {
  std::string id;
  int generation = 0;
  std::vector<LineageEntry> lineage;
  Problem part1;
  Problem part2;
  algebra::Rational bridge_ratio;
  std::size_t bridged_condition_index = 0;
  std::int64_t q1_answer = 0;
  std::int64_t final_answer = 0;
  std::optional<std::string> draft_text;
  std::optional<std::string> final_text;

  friend bool operator==(const CompoundProblem&, const CompoundProblem&) = default;
};

struct BenchmarkItem {
  std::variant<Problem, CompoundProblem> body;
  std::optional<FeatureVector> features;
  std::optional<FitnessReport> fitness;
  std::vector<std::string> flags;  // e.g. "referee-imputed", "polish-fallback"

  bool is_compound() const { return std::holds_alternative<CompoundProblem>(body); }
  const Problem& atomic() const { return std::get<Problem>(body); }
  Problem& atomic() { return std::get<Problem>(body); }
  const CompoundProblem& compound() const { return std::get<CompoundProblem>(body); }
  CompoundProblem& compound() { return std::get<CompoundProblem>(body); }

  const std::string& id() const;
  int generation() const;
  std::int64_t answer() const;  // final answer for compounds
  std::optional<std::int64_t> q1_answer() const;
  std::optional<std::int64_t> trap_answer() const;  // part2's trap for compounds
  const std::optional<std::string>& draft_text() const;
  const std::optional<std::string>& final_text() const;
  std::optional<std::string>& draft_text();
  std::optional<std::string>& final_text();
  /// final_text, falling back to draft_text; empty when neither is present.
  std::string text() const;
  void add_flag(std::string flag);

  friend bool operator==(const BenchmarkItem&, const BenchmarkItem&) = default;
};

/// Every violated type invariant, re-checked with exact arithmetic.  Empty
/// means the item is valid.
std::vector<std::string> validate(const BenchmarkItem& item);
std::vector<std::string> validate(const Problem& problem);

}  // namespace evolmath
