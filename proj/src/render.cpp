#include "evolmath/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include <spdlog/spdlog.h>

#include "evolmath/error.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/rng.hpp"

namespace evolmath {

namespace {

constexpr std::array<std::string_view, 20> kOrdinals = {
    "first",      "second",     "third",      "fourth",      "fifth",
    "sixth",      "seventh",    "eighth",     "ninth",       "tenth",
    "eleventh",   "twelfth",    "thirteenth", "fourteenth",  "fifteenth",
    "sixteenth",  "seventeenth", "eighteenth", "nineteenth", "twentieth"};

constexpr std::string_view kBridgedValue = "the bridged value";

std::string number_words(std::int64_t n) {
  return n < 0 ? "negative " + std::to_string(-n) : std::to_string(n);
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

std::string_view relation_phrase(Relation r) {
  switch (r) {
    case Relation::Equal: return "is exactly";
    case Relation::Approx: return "is approximately";
    case Relation::Similar: return "is similar to";
  }
  return "is";
}

std::string render_lhs(const Problem& p, const LinearCondition& cond) {
  std::string out;
  bool first = true;
  for (const auto& [var, coef] : cond.terms) {
    const std::string name = entity_phrase(p, var);
    const std::int64_t mag = coef < 0 ? -coef : coef;
    const std::string scaled = mag == 1 ? name : std::to_string(mag) + " times " + name;
    if (first) {
      if (coef == -1) {
        out = "the negative of " + name;
      } else {
        out = coef < 0 ? "negative " + scaled : scaled;
      }
      first = false;
    } else {
      out += coef < 0 ? " minus " : " plus ";
      out += scaled;
    }
  }
  return out;
}

std::string render_shortcut(const Problem& p, const LinearCondition& cond) {
  VarId shortcut;
  std::int64_t m = 1;
  for (const auto& [var, coef] : cond.terms) {
    if (var != p.core.target) {
      shortcut = var;
      m = -coef;
    }
  }
  std::string base = entity_phrase(p, shortcut);
  if (m != 1) base = std::to_string(m) + " times " + base;
  std::string affine = base;
  if (cond.rhs > 0) affine = std::to_string(cond.rhs) + " more than " + base;
  if (cond.rhs < 0) affine = std::to_string(-cond.rhs) + " less than " + base;
  return capitalize(entity_phrase(p, p.core.target)) + " " +
         std::string(relation_phrase(cond.relation)) + " " + affine + ".";
}

const Theme* find_theme(const Banks& banks, const std::optional<std::string>& id) {
  if (!id) return nullptr;
  for (const auto& t : banks.themes) {
    if (t.id == *id) return &t;
  }
  return nullptr;
}

// Intro, shuffled condition sentences with fragments inserted at seeded
// positions, then the question.
void render_block(const Problem& p, std::optional<std::size_t> withheld, std::string_view label,
                  Rng& rng, const Banks& banks, std::vector<Segment>& out) {
  if (p.narrative.theme) {
    for (const auto& v : p.all_variables()) {
      if (!p.narrative.entity_names.contains(v)) {
        throw RenderError("problem " + p.id + " has a background but no entity name for " + v.str());
      }
    }
    if (const Theme* theme = find_theme(banks, p.narrative.theme)) {
      out.push_back({Segment::Kind::Intro, theme->intro});
    }
  }

  std::vector<Segment> body;
  for (std::size_t i = 0; i < p.core.conditions.size(); ++i) {
    const bool is_withheld = withheld && *withheld == i;
    body.push_back({Segment::Kind::Condition, render_condition(p, p.core.conditions[i], is_withheld)});
  }
  for (const auto& cond : p.noise_conditions) {
    body.push_back({Segment::Kind::Condition, render_condition(p, cond)});
  }
  rng.shuffle(body);
  auto insert_fragment = [&](Segment::Kind kind, const std::string& text) {
    const auto pos = static_cast<std::ptrdiff_t>(rng.index(body.size() + 1));
    body.insert(body.begin() + pos, Segment{kind, text});
  };
  for (const auto& s : p.narrative.misleading_sentences) insert_fragment(Segment::Kind::Misleading, s);
  for (const auto& s : p.narrative.irrelevant_fragments) insert_fragment(Segment::Kind::Irrelevant, s);
  out.insert(out.end(), body.begin(), body.end());

  out.push_back({Segment::Kind::Question,
                 std::string(label) + ": What is " + entity_phrase(p, p.core.target) + "?"});
}

std::string ratio_words(const algebra::Rational& r) {
  std::string mag = r.sign() < 0 ? (-r).numerator().str() : r.numerator().str();
  if (!r.is_integer()) mag += "/" + r.denominator().str();
  return r.sign() < 0 ? "negative " + mag : mag;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::multiset<std::string> numerals(std::string_view text) {
  static const std::regex digits(R"(\d+)");
  std::multiset<std::string> out;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), digits); it != std::sregex_iterator(); ++it) {
    // Leading zeros are normalized so "08" and "8" compare equal.
    std::string n = it->str();
    n.erase(0, std::min(n.find_first_not_of('0'), n.size() - 1));
    out.insert(std::move(n));
  }
  return out;
}

}  // namespace

std::string entity_phrase(const Problem& p, VarId v) {
  if (auto it = p.narrative.entity_names.find(v); it != p.narrative.entity_names.end()) {
    return it->second;
  }
  if (v.index >= 1 && v.index <= static_cast<int>(kOrdinals.size())) {
    return "the " + std::string(kOrdinals[static_cast<std::size_t>(v.index - 1)]) + " quantity";
  }
  return "quantity " + v.str();
}

std::vector<std::string> entity_phrases(const BenchmarkItem& item) {
  std::vector<std::string> out;
  auto collect = [&](const Problem& p) {
    for (const auto& v : p.all_variables()) {
      auto phrase = entity_phrase(p, v);
      if (std::find(out.begin(), out.end(), phrase) == out.end()) out.push_back(std::move(phrase));
    }
  };
  if (item.is_compound()) {
    collect(item.compound().part1);
    collect(item.compound().part2);
  } else {
    collect(item.atomic());
  }
  return out;
}

std::string render_condition(const Problem& p, const LinearCondition& cond, bool withheld) {
  if (cond.tag == ConditionTag::ShortcutPseudo) return render_shortcut(p, cond);
  const std::string rhs = withheld ? std::string(kBridgedValue) : number_words(cond.rhs);
  return capitalize(render_lhs(p, cond)) + " " + std::string(relation_phrase(cond.relation)) + " " +
         rhs + ".";
}

std::vector<Segment> render_segments(const BenchmarkItem& item, std::uint64_t seed, const Banks& banks) {
  Rng rng(seed);
  std::vector<Segment> out;
  if (!item.is_compound()) {
    render_block(item.atomic(), std::nullopt, "Question", rng, banks, out);
    return out;
  }
  const auto& c = item.compound();
  render_block(c.part1, std::nullopt, "Q1", rng, banks, out);
  out.push_back({Segment::Kind::Bridge, "Now multiply your answer to Q1 by " + ratio_words(c.bridge_ratio) +
                                            " and use this result as " + std::string(kBridgedValue) +
                                            " in the next part."});
  render_block(c.part2, c.bridged_condition_index, "Final", rng, banks, out);
  return out;
}

std::uint64_t render_seed(const BenchmarkItem& item) { return derive_seed(0, "render:" + item.id()); }

std::string render_draft(const BenchmarkItem& item, std::uint64_t seed, const Banks& banks) {
  const auto segments = render_segments(item, seed, banks);
  std::string out;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    out += segments[i].text;
    if (i + 1 == segments.size()) break;
    const bool boundary = segments[i].kind == Segment::Kind::Question ||
                          segments[i].kind == Segment::Kind::Bridge ||
                          segments[i].kind == Segment::Kind::Intro;
    out += boundary ? "\n" : " ";
  }
  return out;
}

std::string render_draft(const BenchmarkItem& item, const Banks& banks) {
  return render_draft(item, render_seed(item), banks);
}

bool verify_polish(std::string_view draft, std::string_view polished, std::span<const std::string> entities) {
  if (numerals(draft) != numerals(polished)) return false;
  const std::string d = lower(draft);
  const std::string q = lower(polished);
  for (const auto& e : entities) {
    const std::string needle = lower(e);
    if ((d.find(needle) != std::string::npos) != (q.find(needle) != std::string::npos)) return false;
  }
  for (std::string_view label : {"Q1:", "Final:", "Question:"}) {
    if (draft.find(label) != std::string_view::npos && polished.find(label) == std::string_view::npos) {
      return false;
    }
  }
  return true;
}

PolishOutcome polish(std::string_view draft, Gateway& gateway, std::span<const std::string> entities,
                     std::string_view prompt_template) {
  const std::string prompt = fill_template(prompt_template, {{"problem", std::string(draft)}});
  std::string reply;
  try {
    reply = gateway.complete(Role::Polisher, prompt);
  } catch (const GatewayError& e) {
    spdlog::warn("polish: gateway failure, keeping draft: {}", e.what());
    return {std::string(draft), false, std::string("gateway failure: ") + e.what()};
  }
  auto trimmed = reply;
  while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back()))) trimmed.pop_back();
  if (!verify_polish(draft, trimmed, entities)) {
    spdlog::info("polish: rewrite changed numerals, entities or labels; keeping draft");
    return {std::string(draft), false, "preservation check failed"};
  }
  return {trimmed, true, {}};
}

}  // namespace evolmath
