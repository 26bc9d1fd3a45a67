#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "evolmath/model.hpp"
#include "evolmath/resources.hpp"

namespace evolmath {

class Gateway;

/// Noun phrase for a variable: its entity name when one is set, otherwise a
/// neutral quantity ("the third quantity").
std::string entity_phrase(const Problem& p, VarId v);

/// Every entity phrase the renderer may emit for an item.
std::vector<std::string> entity_phrases(const BenchmarkItem& item);

/// One condition as a sentence.  `withheld` replaces the rhs with the
/// bridged-value reference used by compound problems.
std::string render_condition(const Problem& p, const LinearCondition& cond, bool withheld = false);

struct Segment {
  enum class Kind { Intro, Condition, Misleading, Irrelevant, Question, Bridge };
  Kind kind;
  std::string text;
};

/// Draft as ordered segments.  Blocks (one per part, plus the bridge) are
/// separated by Kind::Bridge / Kind::Question boundaries.
std::vector<Segment> render_segments(const BenchmarkItem& item, std::uint64_t seed,
                                     const Banks& banks = Banks::builtin());

/// Seed used for an item's draft when none is given: a hash of its id.
std::uint64_t render_seed(const BenchmarkItem& item);

std::string render_draft(const BenchmarkItem& item, std::uint64_t seed,
                         const Banks& banks = Banks::builtin());
std::string render_draft(const BenchmarkItem& item, const Banks& banks = Banks::builtin());

/// True iff the numeral multiset is identical, each listed entity phrase is
/// present in both texts or in neither, and the question labels survive.
bool verify_polish(std::string_view draft, std::string_view polished,
                   std::span<const std::string> entities = {});

struct PolishOutcome {
  std::string text;
  bool accepted = false;
  std::string reason;  // why the draft was kept
};

/// Asks the polisher role for a fluent rewrite and keeps it only when
/// verify_polish accepts it.  Gateway failures fall back to the draft.
PolishOutcome polish(std::string_view draft, Gateway& gateway,
                     std::span<const std::string> entities = {},
                     std::string_view prompt_template = builtin_polish_prompt());

}  // namespace evolmath
