#include "evolmath/model.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "evolmath/error.hpp"

namespace evolmath {

using algebra::Rational;
using algebra::RationalMatrix;

VarId VarId::parse(std::string_view token) {
  if (token.size() < 2 || token.front() != 'v') {
    throw ParseError("malformed variable id \"" + std::string(token) + "\"");
  }
  int value = 0;
  for (char c : token.substr(1)) {
    if (!std::isdigit(static_cast<unsigned char>(c)) || value > 100000000) {
      throw ParseError("malformed variable id \"" + std::string(token) + "\"");
    }
    value = value * 10 + (c - '0');
  }
  if (value <= 0) throw ParseError("variable index must be positive: " + std::string(token));
  return VarId{value};
}

std::string_view to_string(Relation r) noexcept {
  switch (r) {
    case Relation::Equal: return "Equal";
    case Relation::Approx: return "Approx";
    case Relation::Similar: return "Similar";
  }
  return "?";
}

std::string_view to_string(ConditionTag t) noexcept {
  switch (t) {
    case ConditionTag::Core: return "Core";
    case ConditionTag::ShortcutPseudo: return "ShortcutPseudo";
    case ConditionTag::UselessNoise: return "UselessNoise";
    case ConditionTag::MisleadingMath: return "MisleadingMath";
  }
  return "?";
}

Relation parse_relation(std::string_view s) {
  if (s == "Equal") return Relation::Equal;
  if (s == "Approx") return Relation::Approx;
  if (s == "Similar") return Relation::Similar;
  throw ParseError("unknown relation \"" + std::string(s) + "\"");
}

ConditionTag parse_tag(std::string_view s) {
  if (s == "Core") return ConditionTag::Core;
  if (s == "ShortcutPseudo") return ConditionTag::ShortcutPseudo;
  if (s == "UselessNoise") return ConditionTag::UselessNoise;
  if (s == "MisleadingMath") return ConditionTag::MisleadingMath;
  throw ParseError("unknown condition tag \"" + std::string(s) + "\"");
}

Rational LinearCondition::lhs_at(const Assignment& values) const {
  Rational sum;
  for (const auto& [var, coef] : terms) {
    auto it = values.find(var);
    if (it == values.end()) throw InvalidInput("no value assigned to " + var.str());
    sum += Rational(coef) * Rational(it->second);
  }
  return sum;
}

RationalMatrix AlgebraicCore::coefficient_matrix() const {
  RationalMatrix m(0, variables.size());
  std::vector<Rational> row(variables.size());
  for (const auto& cond : conditions) {
    for (std::size_t c = 0; c < variables.size(); ++c) {
      auto it = cond.terms.find(variables[c]);
      row[c] = it == cond.terms.end() ? Rational() : Rational(it->second);
    }
    m.append_row(row);
  }
  return m;
}

std::vector<Rational> AlgebraicCore::rhs_vector() const {
  std::vector<Rational> b;
  b.reserve(conditions.size());
  for (const auto& cond : conditions) b.emplace_back(cond.rhs);
  return b;
}

std::map<VarId, Rational> solve_core(const AlgebraicCore& core) {
  const std::size_t n = core.variables.size();
  if (n == 0) throw InvalidInput("solve_core: core has no variables");
  const RationalMatrix a = core.coefficient_matrix();
  const std::vector<Rational> b = core.rhs_vector();
  if (a.rows() < n) throw SingularSystem("solve_core: fewer equations than variables");

  std::vector<Rational> x;
  if (a.rows() == n) {
    x = algebra::solve_unique(a, b);
  } else {
    RationalMatrix square(0, n);
    std::vector<Rational> sub_b;
    std::size_t current = 0;
    for (std::size_t r = 0; r < a.rows() && sub_b.size() < n; ++r) {
      RationalMatrix trial = square;
      trial.append_row(a.row(r));
      const std::size_t k = algebra::rank(trial);
      if (k > current) {
        square = std::move(trial);
        sub_b.push_back(b[r]);
        current = k;
      }
    }
    if (sub_b.size() < n) throw SingularSystem("solve_core: system is rank deficient");
    x = algebra::solve_unique(square, sub_b);
    if (a.multiply(x) != b) throw SingularSystem("solve_core: system is inconsistent");
  }
  std::map<VarId, Rational> out;
  for (std::size_t i = 0; i < n; ++i) out.emplace(core.variables[i], x[i]);
  return out;
}

Rational oracle_answer(const AlgebraicCore& core) {
  auto solution = solve_core(core);
  auto it = solution.find(core.target);
  if (it == solution.end()) throw InvalidInput("oracle_answer: target is not a core variable");
  return it->second;
}

std::vector<VarId> Problem::all_variables() const {
  std::vector<VarId> vars = core.variables;
  for (const auto& [v, value] : noise_solution) vars.push_back(v);
  return vars;
}

// ---------------------------------------------------------------------------
// BenchmarkItem accessors

const std::string& BenchmarkItem::id() const {
  return is_compound() ? compound().id : atomic().id;
}

int BenchmarkItem::generation() const {
  return is_compound() ? compound().generation : atomic().generation;
}

std::int64_t BenchmarkItem::answer() const {
  return is_compound() ? compound().final_answer : atomic().answer;
}

std::optional<std::int64_t> BenchmarkItem::q1_answer() const {
  if (!is_compound()) return std::nullopt;
  return compound().q1_answer;
}

std::optional<std::int64_t> BenchmarkItem::trap_answer() const {
  return is_compound() ? compound().part2.trap_answer : atomic().trap_answer;
}

const std::optional<std::string>& BenchmarkItem::draft_text() const {
  return is_compound() ? compound().draft_text : atomic().draft_text;
}

const std::optional<std::string>& BenchmarkItem::final_text() const {
  return is_compound() ? compound().final_text : atomic().final_text;
}

std::optional<std::string>& BenchmarkItem::draft_text() {
  return is_compound() ? compound().draft_text : atomic().draft_text;
}

std::optional<std::string>& BenchmarkItem::final_text() {
  return is_compound() ? compound().final_text : atomic().final_text;
}

std::string BenchmarkItem::text() const {
  if (final_text()) return *final_text();
  if (draft_text()) return *draft_text();
  return {};
}

void BenchmarkItem::add_flag(std::string flag) {
  if (std::find(flags.begin(), flags.end(), flag) == flags.end()) flags.push_back(std::move(flag));
}

// ---------------------------------------------------------------------------
// Validation

namespace {

bool has_digit(std::string_view text) {
  return std::any_of(text.begin(), text.end(),
                     [](unsigned char c) { return std::isdigit(c) != 0; });
}

void check_condition(const LinearCondition& cond, const std::string& where,
                     std::vector<std::string>& out) {
  if (cond.terms.empty()) out.push_back(where + ": condition has no terms");
  for (const auto& [var, coef] : cond.terms) {
    if (coef == 0) out.push_back(where + ": zero coefficient on " + var.str());
  }
  const bool hedged = cond.relation == Relation::Approx || cond.relation == Relation::Similar;
  switch (cond.tag) {
    case ConditionTag::Core:
    case ConditionTag::UselessNoise:
      if (cond.relation != Relation::Equal) {
        out.push_back(where + ": " + std::string(to_string(cond.tag)) +
                      " condition must use Equal");
      }
      break;
    case ConditionTag::ShortcutPseudo:
    case ConditionTag::MisleadingMath:
      if (!hedged) {
        out.push_back(where + ": " + std::string(to_string(cond.tag)) +
                      " condition must use Approx or Similar");
      }
      break;
  }
}

void check_core(const AlgebraicCore& core, std::vector<std::string>& out) {
  const std::set<VarId> vars(core.variables.begin(), core.variables.end());
  if (core.variables.empty()) {
    out.push_back("core has no variables");
    return;
  }
  if (vars.size() != core.variables.size()) out.push_back("core variables are not distinct");
  if (!vars.contains(core.target)) out.push_back("target is not a core variable");
  for (const auto& v : core.variables) {
    if (!core.solution.contains(v)) out.push_back("solution missing " + v.str());
  }
  for (const auto& [v, value] : core.solution) {
    if (!vars.contains(v)) out.push_back("solution assigns non-core variable " + v.str());
  }
  bool evaluable = true;
  for (std::size_t i = 0; i < core.conditions.size(); ++i) {
    const auto& cond = core.conditions[i];
    const std::string where = "core condition " + std::to_string(i);
    check_condition(cond, where, out);
    if (cond.tag != ConditionTag::Core) out.push_back(where + ": tag must be Core");
    for (const auto& [var, coef] : cond.terms) {
      if (!vars.contains(var)) {
        out.push_back(where + ": references unknown variable " + var.str());
        evaluable = false;
      }
    }
    if (evaluable && out.empty()) {
      if (cond.lhs_at(core.solution) != Rational(cond.rhs)) {
        out.push_back(where + ": not satisfied by solution");
      }
    }
  }
  if (!out.empty()) return;
  if (core.conditions.size() < core.variables.size() ||
      algebra::rank(core.coefficient_matrix()) != core.variables.size()) {
    out.push_back("coefficient matrix is not full rank");
  }
}

}  // namespace

std::vector<std::string> validate(const Problem& p) {
  std::vector<std::string> out;
  if (p.id.empty()) out.push_back("empty id");
  if (p.generation < 0) out.push_back("negative generation");

  std::vector<std::string> core_issues;
  check_core(p.core, core_issues);
  out.insert(out.end(), core_issues.begin(), core_issues.end());
  const bool core_ok = core_issues.empty();

  if (core_ok) {
    auto it = p.core.solution.find(p.core.target);
    if (it != p.core.solution.end() && it->second != p.answer) {
      out.push_back("answer differs from solution[target]");
    }
  }
  if (p.trap_answer && *p.trap_answer == p.answer) out.push_back("trap equals truth");

  const std::set<VarId> core_vars(p.core.variables.begin(), p.core.variables.end());
  for (const auto& [v, value] : p.noise_solution) {
    if (core_vars.contains(v)) out.push_back("noise variable " + v.str() + " collides with core");
  }

  std::size_t pseudo_count = 0;
  for (std::size_t i = 0; i < p.noise_conditions.size(); ++i) {
    const auto& cond = p.noise_conditions[i];
    const std::string where = "noise condition " + std::to_string(i);
    check_condition(cond, where, out);
    switch (cond.tag) {
      case ConditionTag::Core:
        out.push_back(where + ": noise condition tagged Core");
        break;
      case ConditionTag::UselessNoise: {
        bool ok = true;
        for (const auto& [var, coef] : cond.terms) {
          if (core_vars.contains(var)) {
            out.push_back(where + ": UselessNoise condition references core variable " + var.str());
            ok = false;
          } else if (!p.noise_solution.contains(var)) {
            out.push_back(where + ": UselessNoise variable " + var.str() + " has no preset value");
            ok = false;
          }
        }
        if (ok && cond.lhs_at(p.noise_solution) != Rational(cond.rhs)) {
          out.push_back(where + ": UselessNoise condition not satisfied by its preset values");
        }
        break;
      }
      case ConditionTag::ShortcutPseudo:
      case ConditionTag::MisleadingMath: {
        bool ok = true;
        for (const auto& [var, coef] : cond.terms) {
          if (!core_vars.contains(var)) {
            out.push_back(where + ": references non-core variable " + var.str());
            ok = false;
          }
        }
        if (!ok || !core_ok) break;
        if (cond.tag == ConditionTag::MisleadingMath) {
          if (cond.lhs_at(p.core.solution) == Rational(cond.rhs)) {
            out.push_back(where + ": MisleadingMath condition holds exactly");
          }
          break;
        }
        ++pseudo_count;
        auto t = cond.terms.find(p.core.target);
        if (t == cond.terms.end() || t->second != 1 || cond.terms.size() != 2) {
          out.push_back(where + ": ShortcutPseudo must link the target to one shortcut variable");
          break;
        }
        Rational trap(cond.rhs);
        for (const auto& [var, coef] : cond.terms) {
          if (var != p.core.target) trap -= Rational(coef) * Rational(p.core.solution.at(var));
        }
        if (!p.trap_answer) {
          out.push_back(where + ": ShortcutPseudo present without trap_answer");
        } else if (trap != Rational(*p.trap_answer)) {
          out.push_back(where + ": trap_answer disagrees with the pseudo-condition");
        }
        break;
      }
    }
  }
  if (pseudo_count > 1) out.push_back("more than one ShortcutPseudo condition");
  if (p.trap_answer && pseudo_count == 0) out.push_back("trap_answer without ShortcutPseudo condition");

  const auto& nar = p.narrative;
  if (nar.theme) {
    for (const auto& v : p.all_variables()) {
      if (!nar.entity_names.contains(v)) out.push_back("background set but " + v.str() + " has no entity name");
    }
  }
  std::set<std::string> names;
  for (const auto& [v, name] : nar.entity_names) {
    if (name.empty()) out.push_back("empty entity name for " + v.str());
    if (has_digit(name)) out.push_back("entity name for " + v.str() + " contains digits");
    if (!names.insert(name).second) out.push_back("duplicate entity name \"" + name + "\"");
  }
  for (const auto& s : nar.misleading_sentences) {
    if (has_digit(s)) out.push_back("misleading sentence contains digits");
  }
  for (const auto& s : nar.irrelevant_fragments) {
    if (has_digit(s)) out.push_back("irrelevant fragment contains digits");
  }
  return out;
}

std::vector<std::string> validate(const BenchmarkItem& item) {
  std::vector<std::string> out;
  if (!item.is_compound()) {
    out = validate(item.atomic());
  } else {
    const auto& c = item.compound();
    if (c.id.empty()) out.push_back("empty id");
    for (auto& v : validate(c.part1)) out.push_back("part1: " + v);
    for (auto& v : validate(c.part2)) out.push_back("part2: " + v);
    if (c.q1_answer != c.part1.answer) out.push_back("q1_answer differs from part1 answer");
    if (c.final_answer != c.part2.answer) out.push_back("final_answer differs from part2 answer");
    if (c.bridged_condition_index >= c.part2.core.conditions.size()) {
      out.push_back("bridged condition index out of range");
    } else {
      const auto& bridged = c.part2.core.conditions[c.bridged_condition_index];
      if (c.bridge_ratio * Rational(c.q1_answer) != Rational(bridged.rhs)) {
        out.push_back("bridge ratio does not reconstruct the bridged rhs");
      }
    }
  }
  if (item.fitness) {
    if (!item.features) {
      out.push_back("fitness present without features");
    } else if (item.fitness->raw != *item.features) {
      out.push_back("fitness raw features differ from item features");
    }
    const auto& f = *item.fitness;
    if (f.selected != (f.composite_pass && f.deficiency_pass)) {
      out.push_back("selected is not composite_pass and deficiency_pass");
    }
  }
  return out;
}

}  // namespace evolmath
