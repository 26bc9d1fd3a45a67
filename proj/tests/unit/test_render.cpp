#include <doctest.h>

#include <memory>

#include "evolmath/error.hpp"
#include "evolmath/gateway.hpp"
#include "evolmath/operators.hpp"
#include "evolmath/render.hpp"
#include "../support/builders.hpp"

using namespace evolmath;
namespace ts = testing_support;

namespace {

Gateway stub_gateway(std::shared_ptr<Backend> backend) {
  GatewayConfig cfg;
  cfg.api_key = "test";
  cfg.model_id = "stub";
  cfg.backoff_base = std::chrono::milliseconds(0);
  return Gateway(cfg, std::move(backend));
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

}  // namespace

TEST_SUITE("render") {

TEST_CASE("condition sentences") {
  auto p = ts::problem("a", ts::two_by_two());
  p.narrative.entity_names[VarId{1}] = "the number of cats";
  p.narrative.entity_names[VarId{2}] = "the number of dogs";
  CHECK(render_condition(p, p.core.conditions[0]) == "The number of cats plus the number of dogs is exactly 8.");

  LinearCondition pseudo = ts::eq({{1, 1}, {2, -1}}, 2);
  pseudo.tag = ConditionTag::ShortcutPseudo;
  pseudo.relation = Relation::Approx;
  const auto s = render_condition(p, pseudo);
  CHECK(s.find("is approximately 2 more than") != std::string::npos);

  LinearCondition similar = ts::eq({{1, 3}}, 4);
  similar.relation = Relation::Similar;
  CHECK(render_condition(p, similar).find("is similar to 4") != std::string::npos);

  const auto plain = ts::problem("b", ts::two_by_two());
  CHECK(render_condition(plain, plain.core.conditions[1]) ==
        "The first quantity minus the second quantity is exactly 2.");
}

TEST_CASE("compound drafts bridge with the exact ratio") {
  Rng rng(0);
  const auto p1 = ts::problem("a", ts::core({ts::eq({{1, 1}, {2, 1}}, 10), ts::eq({{1, 1}, {2, -1}}, 4)}, {7, 3}, 1));
  const auto p2 = ts::problem("b", ts::core({ts::eq({{1, 1}, {2, 1}}, 21), ts::eq({{1, 1}, {2, 2}}, 21)}, {21, 0}, 2));
  const BenchmarkItem item{crossover(p1, p2, rng), {}, {}, {}};
  const auto segments = render_segments(item, 1);
  bool found_bridge = false;
  for (const auto& s : segments) {
    if (s.kind == Segment::Kind::Bridge) {
      found_bridge = true;
      CHECK(s.text.find("multiply") != std::string::npos);
      CHECK(s.text.find('3') != std::string::npos);
    }
  }
  CHECK(found_bridge);
  const auto draft = render_draft(item);
  CHECK(draft.find("Q1:") != std::string::npos);
  CHECK(draft.find("Final:") != std::string::npos);
  CHECK(draft.find("Q1:") < draft.find("Final:"));
}

TEST_CASE("drafts are deterministic and complete") {
  OperatorSuiteConfig suite;
  for (int i = 0; i < 20; ++i) {
    const auto base = ts::seed_problem(3, "s" + std::to_string(i));
    Rng rng(static_cast<std::uint64_t>(i));
    const BenchmarkItem item{mutate(base, suite, rng), {}, {}, {}};
    const auto d1 = render_draft(item);
    CHECK(d1 == render_draft(item));
    const auto segments = render_segments(item, render_seed(item));
    std::size_t conditions = 0;
    for (const auto& s : segments) conditions += s.kind == Segment::Kind::Condition;
    CHECK(conditions == item.atomic().condition_count());
    CHECK(segments.back().kind == Segment::Kind::Question);
    for (const auto& phrase : entity_phrases(item)) CHECK(d1.find(phrase) != std::string::npos);
  }
}

TEST_CASE("background without entity names is a render error") {
  auto p = ts::problem("a", ts::two_by_two());
  p.narrative.theme = Banks::builtin().themes.front().id;
  p.narrative.entity_names[VarId{1}] = "the apples";
  CHECK_THROWS_AS(render_draft(BenchmarkItem{p, {}, {}, {}}), RenderError);
}

TEST_CASE("verify_polish") {
  const std::string draft = "The number of cats plus the number of dogs is exactly 8. Question: What is the number of cats?";
  const std::vector<std::string> ents{"the number of cats", "the number of dogs"};
  CHECK(verify_polish(draft, draft, ents));
  CHECK_FALSE(verify_polish(draft, replace_all(draft, "8", ""), ents));
  CHECK_FALSE(verify_polish(draft, replace_all(draft, "cats", "felines"), ents));
  CHECK_FALSE(verify_polish(draft, replace_all(draft, "Question:", "So"), ents));
  CHECK(verify_polish(draft, replace_all(draft, "is exactly", "comes to"), ents));
}

TEST_CASE("polish with stub gateways") {
  const std::string draft = "The number of cats plus the number of dogs is exactly 8. Question: What is the number of cats?";
  const std::vector<std::string> ents{"the number of cats", "the number of dogs"};

  auto echo = stub_gateway(std::make_shared<ConstantBackend>(draft));
  auto out = polish(draft, echo, ents);
  CHECK(out.text == draft);

  const std::string reworded = "Together the number of cats and the number of dogs come to 8. Question: What is the number of cats?";
  auto good = stub_gateway(std::make_shared<ConstantBackend>(reworded));
  out = polish(draft, good, ents);
  CHECK(out.accepted);
  CHECK(out.text == reworded);

  auto bad = stub_gateway(std::make_shared<ConstantBackend>(replace_all(draft, "8", "9")));
  out = polish(draft, bad, ents);
  CHECK_FALSE(out.accepted);
  CHECK(out.text == draft);
  CHECK_FALSE(out.reason.empty());

  auto failing = stub_gateway(std::make_shared<FunctionBackend>([](Role, const std::string&) -> std::string {
    throw GatewayError("down", 400);
  }));
  out = polish(draft, failing, ents);
  CHECK_FALSE(out.accepted);
  CHECK(out.text == draft);
}

}  // TEST_SUITE
