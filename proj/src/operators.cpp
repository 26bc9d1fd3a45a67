#include "evolmath/operators.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "evolmath/error.hpp"

namespace evolmath {

using algebra::Rational;
using algebra::RationalMatrix;

void OperatorSuiteConfig::validate() const {
  if (!enable_formulaic && !enable_linguistic && !enable_crossover) {
    throw ConfigError("at least one operator group must be enabled");
  }
}

namespace {

// Subsets larger than this are not enumerated; the full system always
// determines every variable anyway.
constexpr std::size_t kMaxSubsetSize = 12;

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

LineageEntry lineage_for(const Problem& p, std::string op) {
  return {std::move(op), p.id, p.generation};
}

int next_free_index(const Problem& p) {
  int max_index = 0;
  for (const auto& v : p.all_variables()) max_index = std::max(max_index, v.index);
  return max_index + 1;
}

const Theme* find_theme(const Banks& banks, const std::string& id) {
  for (const auto& t : banks.themes) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

Relation hedged_relation(Rng& rng) { return rng.coin() ? Relation::Approx : Relation::Similar; }

}  // namespace

std::optional<VarId> find_shortcut_variable(const AlgebraicCore& core) {
  const std::size_t m = core.conditions.size();
  const std::size_t n = core.variables.size();
  if (n < 2 || m == 0) return std::nullopt;
  const RationalMatrix a = core.coefficient_matrix();

  std::vector<std::vector<Rational>> units;
  for (std::size_t c = 0; c < n; ++c) {
    std::vector<Rational> e(n);
    e[c] = Rational(1);
    units.push_back(std::move(e));
  }

  auto first_determined = [&](const RationalMatrix& rows) -> std::optional<VarId> {
    for (std::size_t c = 0; c < n; ++c) {
      if (core.variables[c] == core.target) continue;
      if (algebra::in_row_space(units[c], rows)) return core.variables[c];
    }
    return std::nullopt;
  };

  for (std::size_t k = 1; k <= std::min(m, kMaxSubsetSize); ++k) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    do {
      RationalMatrix rows(0, n);
      for (std::size_t r : idx) rows.append_row(a.row(r));
      if (auto v = first_determined(rows)) return v;
    } while (next_combination(idx, m));
  }
  return first_determined(a);
}

Problem approximate_replacement(const Problem& p, Rng& rng) {
  for (const auto& c : p.noise_conditions) {
    if (c.tag == ConditionTag::ShortcutPseudo) throw OperatorSkip("problem already carries a shortcut");
  }
  const auto shortcut = find_shortcut_variable(p.core);
  if (!shortcut) throw OperatorSkip("no shortcut variable distinct from the target");
  const std::int64_t s_value = p.core.solution.at(*shortcut);

  constexpr int kAttempts = 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    const std::int64_t m = rng.uniform_int(1, 2);
    const std::int64_t d = rng.uniform_int(-5, 5);
    const std::int64_t trap = m * s_value + d;
    if (trap == p.answer) continue;

    Problem out = p;
    LinearCondition cond;
    cond.terms[p.core.target] = 1;
    cond.terms[*shortcut] = -m;
    cond.rhs = d;
    cond.relation = hedged_relation(rng);
    cond.tag = ConditionTag::ShortcutPseudo;
    out.noise_conditions.push_back(std::move(cond));
    out.trap_answer = trap;
    out.lineage.push_back(lineage_for(p, "approximate_replacement"));
    return out;
  }
  throw OperatorSkip("could not find a pseudo-condition whose trap differs from the answer");
}

Problem add_useless_conditions(const Problem& p, std::size_t k, Rng& rng, const SeedConfig& ranges,
                               const Banks& banks) {
  if (k == 0) return p;
  Problem out = p;
  const int first = next_free_index(p);
  std::vector<VarId> fresh;
  for (std::size_t i = 0; i < k; ++i) fresh.push_back(VarId{first + static_cast<int>(i)});

  if (p.narrative.theme) {
    const Theme* theme = find_theme(banks, *p.narrative.theme);
    std::set<std::string> used;
    for (const auto& [v, name] : p.narrative.entity_names) used.insert(name);
    std::vector<std::string> available;
    if (theme) {
      for (const auto& e : theme->entities) {
        if (!used.contains(e)) available.push_back(e);
      }
    }
    if (available.size() < k) throw OperatorSkip("theme has no unused entity names for new variables");
    for (std::size_t i = 0; i < k; ++i) {
      out.narrative.entity_names[fresh[i]] = available[rng.index(available.size())];
      available.erase(std::find(available.begin(), available.end(),
                                out.narrative.entity_names[fresh[i]]));
    }
  }

  SeedConfig sys = ranges;
  sys.sparsity = static_cast<int>(std::min<std::size_t>(2, k));
  AlgebraicCore noise = generate_system(fresh, sys, false, rng);
  for (auto& cond : noise.conditions) {
    cond.tag = ConditionTag::UselessNoise;
    out.noise_conditions.push_back(std::move(cond));
  }
  for (const auto& [v, value] : noise.solution) out.noise_solution[v] = value;
  out.lineage.push_back(lineage_for(p, "useless_conditions"));
  return out;
}

Problem add_misleading_math(const Problem& p, std::size_t k, Rng& rng) {
  if (k == 0) return p;
  Problem out = p;
  const auto& vars = p.core.variables;
  for (std::size_t i = 0; i < k; ++i) {
    LinearCondition cond;
    const std::size_t width = std::min<std::size_t>(2, vars.size());
    for (std::size_t idx : rng.sample_indices(vars.size(), width)) {
      cond.terms[vars[idx]] = rng.uniform_int(1, 3);
    }
    const Rational exact = cond.lhs_at(p.core.solution);
    const std::int64_t magnitude = rng.uniform_int(2, 7);
    const std::int64_t perturbation = rng.coin() ? magnitude : -magnitude;
    cond.rhs = exact.to_int64() + perturbation;
    cond.relation = hedged_relation(rng);
    cond.tag = ConditionTag::MisleadingMath;
    out.noise_conditions.push_back(std::move(cond));
  }
  out.lineage.push_back(lineage_for(p, "misleading_math"));
  return out;
}

Problem add_misleading_text(const Problem& p, std::size_t k, Rng& rng, const Banks& banks) {
  if (k == 0) return p;
  if (banks.misleading_text.empty()) throw OperatorSkip("misleading-text bank is empty");
  Problem out = p;
  for (std::size_t i = 0; i < k; ++i) {
    out.narrative.misleading_sentences.push_back(
        rng.pick(std::span<const std::string>(banks.misleading_text)));
  }
  out.lineage.push_back(lineage_for(p, "misleading_text"));
  return out;
}

Problem add_background(const Problem& p, Rng& rng, const Banks& banks) {
  const auto vars = p.all_variables();
  std::vector<const Theme*> eligible;
  for (const auto& t : banks.themes) {
    if (t.entities.size() >= vars.size()) eligible.push_back(&t);
  }
  if (eligible.empty()) {
    throw OperatorSkip("no theme has " + std::to_string(vars.size()) + " entity names");
  }
  const Theme& theme = *eligible[rng.index(eligible.size())];
  Problem out = p;
  out.narrative.theme = theme.id;
  out.narrative.entity_names.clear();
  const auto picks = rng.sample_indices(theme.entities.size(), vars.size());
  for (std::size_t i = 0; i < vars.size(); ++i) {
    out.narrative.entity_names[vars[i]] = theme.entities[picks[i]];
  }
  out.lineage.push_back(lineage_for(p, "background"));
  return out;
}

Problem add_irrelevant_topic(const Problem& p, std::size_t k, Rng& rng, const Banks& banks) {
  if (k == 0) return p;
  if (banks.irrelevant_fragments.empty()) throw OperatorSkip("irrelevant-fragment bank is empty");
  Problem out = p;
  for (std::size_t i = 0; i < k; ++i) {
    out.narrative.irrelevant_fragments.push_back(
        rng.pick(std::span<const std::string>(banks.irrelevant_fragments)));
  }
  out.lineage.push_back(lineage_for(p, "irrelevant_topic"));
  return out;
}

CompoundProblem crossover(const Problem& p1, const Problem& p2, Rng& rng) {
  if (p1.answer == 0) throw OperatorSkip("first parent's answer is 0; no bridge ratio exists");
  if (p2.core.conditions.empty()) throw OperatorSkip("second parent has no core condition to bridge");

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < p2.core.conditions.size(); ++i) {
    if (p2.core.conditions[i].rhs != 0) candidates.push_back(i);
  }
  if (candidates.empty()) {
    candidates.resize(p2.core.conditions.size());
    std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  }

  CompoundProblem c;
  c.id = p1.id + "+" + p2.id;
  c.generation = std::max(p1.generation, p2.generation);
  c.part1 = p1;
  c.part2 = p2;
  c.bridged_condition_index = candidates[rng.index(candidates.size())];
  c.bridge_ratio = Rational(p2.core.conditions[c.bridged_condition_index].rhs) / Rational(p1.answer);
  c.q1_answer = p1.answer;
  c.final_answer = p2.answer;
  c.lineage.push_back({"crossover", c.id, c.generation});
  return c;
}

Problem mutate(const Problem& p, const OperatorSuiteConfig& cfg, Rng& rng, const Banks& banks,
               const SeedConfig& ranges, std::vector<std::string>* skipped) {
  Problem current = p;
  auto attempt = [&](const char* name, auto&& op) {
    try {
      current = op(current);
    } catch (const OperatorSkip& e) {
      if (skipped) skipped->push_back(std::string(name) + ": " + e.what());
    }
  };
  if (cfg.enable_formulaic) {
    attempt("approximate_replacement", [&](const Problem& q) { return approximate_replacement(q, rng); });
    attempt("useless_conditions",
            [&](const Problem& q) { return add_useless_conditions(q, cfg.useless_count, rng, ranges, banks); });
    attempt("misleading_math",
            [&](const Problem& q) { return add_misleading_math(q, cfg.misleading_math_count, rng); });
  }
  if (cfg.enable_linguistic) {
    attempt("background", [&](const Problem& q) { return add_background(q, rng, banks); });
    attempt("misleading_text",
            [&](const Problem& q) { return add_misleading_text(q, cfg.misleading_text_count, rng, banks); });
    attempt("irrelevant_topic",
            [&](const Problem& q) { return add_irrelevant_topic(q, cfg.irrelevant_count, rng, banks); });
  }
  return current;
}

Pairing random_pairing(std::size_t n, Rng& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  Pairing out;
  for (std::size_t i = 0; i + 1 < n; i += 2) out.pairs.emplace_back(order[i], order[i + 1]);
  if (n % 2 == 1) out.leftover = order.back();
  return out;
}

}  // namespace evolmath
