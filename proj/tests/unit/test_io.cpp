#include "doctest.h"

#include "opaq/error.hpp"
#include "opaq/hoa.hpp"
#include "opaq/io.hpp"
#include "support.hpp"

#include <string>

using namespace opaq;
using namespace opaq::testing;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_model(text);
  } catch (const ModelError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"({
  "states": ["s", "t"],
  "labels": ["x"],
  "actions": ["go"],
  "initial": "s",
  "transitions": [
    {"from": "s", "action": "go", "dist": [{"label": "x", "to": "t", "prob": "1"}]},
    {"from": "t", "action": "go", "dist": [{"label": "x", "to": "t", "prob": "1"}]}
  ]
})";

}  // namespace

TEST_CASE("twin fixture holds the expected model") {
  const ModelDocument doc = load_model(fixture("twin.json"));
  const LabeledMdp& m = doc.model.base;
  CHECK(m.states == std::vector<std::string>{"q0", "q0'", "q1", "q2"});
  const StateId q0 = 0, q0p = 1, q1 = 2, q2 = 3;
  const LabelId a = 0, b = 1, o1 = 2, o2 = 3;
  const ActionId a1 = 0, a2 = 1, b1 = 2, b2 = 3;
  const Choice* c = m.find_choice(q0, a1);
  REQUIRE(c);
  CHECK(c->outcomes == std::vector<Outcome>{{a, q1, Rational(3, 4)}, {b, q1, Rational(1, 4)}});
  CHECK(m.find_choice(q0, a2)->outcomes == std::vector<Outcome>{{a, q2, Rational(1, 4)}, {b, q2, Rational(3, 4)}});
  CHECK(m.find_choice(q0p, a1)->outcomes == std::vector<Outcome>{{a, q2, Rational(3, 4)}, {b, q2, Rational(1, 4)}});
  CHECK(m.find_choice(q0p, a2)->outcomes == std::vector<Outcome>{{a, q1, Rational(1, 4)}, {b, q1, Rational(3, 4)}});
  CHECK(m.find_choice(q1, b1)->outcomes == std::vector<Outcome>{{o1, q0, Rational(1, 2)}, {o1, q0p, Rational(1, 2)}});
  CHECK(m.find_choice(q2, b2)->outcomes == std::vector<Outcome>{{o2, q0, Rational(1, 2)}, {o2, q0p, Rational(1, 2)}});
  CHECK(doc.model.observation_class == std::vector<std::size_t>{0, 0, 1, 2});
  REQUIRE(doc.projection);
  CHECK(doc.projection->of_state(q0) == kErased);
  CHECK(doc.projection->of_step(a1, a) == kErased);
  CHECK(doc.projection->observables[doc.projection->of_step(b1, o1)] == "o1");
  CHECK_FALSE(doc.perfect_observation());
}

TEST_CASE("model files round-trip") {
  auto rng = make_rng(81);
  for (int round = 0; round < 40; ++round) {
    ModelDocument doc;
    doc.model = random_pomdp(rng, 1 + round % 4, 1 + round % 3, 1 + round % 2, 2);
    doc.has_equivalence = round % 2 == 0;
    if (!doc.has_equivalence)
      for (StateId q = 0; q < doc.model.base.num_states(); ++q) doc.model.observation_class[q] = q;
    if (round % 3 == 0) doc.projection = random_projection(rng, doc.model.base);
    if (round % 5 == 0) doc.priorities = std::vector<unsigned>(doc.model.base.num_states(), 3);
    const std::string text = print_model(doc);
    const ModelDocument back = parse_model(text);
    CHECK(back == doc);
    CHECK(print_model(back) == text);
  }
}

TEST_CASE("probabilities are parsed exactly") {
  std::string text = kSmall;
  text.replace(text.find("\"1\"}]},\n    {\"from\": \"t\""), 3, "\"6/6\"");
  CHECK(parse_model(text).model.base.choices[0][0].outcomes[0].probability == 1);
}

TEST_CASE("a third, a third and a half parse but do not validate") {
  const std::string text = R"({
    "states": ["s"], "labels": ["x", "y", "z"], "actions": ["go"], "initial": "s",
    "transitions": [{"from": "s", "action": "go", "dist": [
      {"label": "x", "to": "s", "prob": "1/3"},
      {"label": "y", "to": "s", "prob": "1/3"},
      {"label": "z", "to": "s", "prob": "1/2"}]}]})";
  const ModelDocument doc = parse_model(text);
  const auto d = validate(doc.model.base);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "distribution-sum");
}

TEST_CASE("model file diagnostics") {
  CHECK(error_of("{\n  \"states\": [\"s\",\n}").find("line 3") != std::string::npos);

  std::string unknown = kSmall;
  unknown.insert(unknown.find("\"initial\""), "\"colour\": 1,\n  ");
  const std::string e1 = error_of(unknown);
  CHECK(e1.find("unknown field 'colour'") != std::string::npos);
  CHECK(e1.find("line 5") != std::string::npos);

  std::string bad_name = kSmall;
  bad_name.replace(bad_name.find("\"to\": \"t\""), 9, "\"to\": \"u\"");
  CHECK(error_of(bad_name).find("unknown state 'u'") != std::string::npos);

  std::string distribution = kSmall;
  distribution.replace(distribution.find("\"initial\": \"s\""), 14, "\"initial\": {\"s\": \"1\"}");
  CHECK(error_of(distribution).find("initial distributions are not supported") != std::string::npos);

  std::string partition = kSmall;
  partition.insert(partition.rfind('}'), ", \"equivalence\": [[\"s\"], [\"s\", \"t\"]]");
  CHECK(error_of(partition).find("appears in two classes") != std::string::npos);

  std::string missing = kSmall;
  missing.insert(missing.rfind('}'), ", \"equivalence\": [[\"s\"]]");
  CHECK(error_of(missing).find("'t' is in no class") != std::string::npos);

  std::string bad_prob = kSmall;
  bad_prob.replace(bad_prob.find("\"prob\": \"1\""), 11, "\"prob\": \"1/0\"");
  CHECK(error_of(bad_prob).find("malformed probability") != std::string::npos);

  CHECK(error_of("[]").find("expected an object") != std::string::npos);
  CHECK(error_of("{\"states\": [\"s\"]}").find("missing field") != std::string::npos);
}

TEST_CASE("projection step keys may contain commas") {
  const std::string text = R"({
    "states": ["s"], "labels": ["x,y", "y"], "actions": ["a", "a,x"], "initial": "s",
    "transitions": [
      {"from": "s", "action": "a", "dist": [{"label": "x,y", "to": "s", "prob": "1"}]},
      {"from": "s", "action": "a,x", "dist": [{"label": "y", "to": "s", "prob": "1"}]}],
    "projection": {"observables": ["o"], "states": {"s": ""}, "steps": {"a,x,y": "o"}}})";
  CHECK(error_of(text).find("does not name exactly one") != std::string::npos);
}

TEST_CASE("alternation secret") {
  const DetAutomaton a = load_hoa(fixture("alternation.hoa"));
  CHECK(a.kind == AcceptanceKind::Buchi);
  CHECK(a.num_states() == 4);
  CHECK(a.num_letters() == 6);
  CHECK(a.acceptance == std::vector<unsigned>{0, 0, 1, 0});
  // a o1 b o2, repeated
  CHECK(accepts_lasso(a, {{}, {0, 4, 3, 5}}));
  CHECK_FALSE(accepts_lasso(a, {{}, {0, 4, 2, 5}}));
}

TEST_CASE("HOA round trip") {
  auto rng = make_rng(82);
  for (int round = 0; round < 60; ++round) {
    const AcceptanceKind kind = round % 3 == 0 ? AcceptanceKind::Buchi
                                : round % 3 == 1 ? AcceptanceKind::CoBuchi
                                                 : AcceptanceKind::Parity;
    DetAutomaton a = random_det(rng, 1 + round % 5, 1 + round % 3, kind);
    if (round % 4 == 0) a.next(0, 0) = kNoState;
    const std::string text = print_hoa(a, "random");
    const DetAutomaton back = parse_hoa(text);
    CHECK(back.alphabet == a.alphabet);
    CHECK(back.delta == a.delta);
    CHECK(back.initial == a.initial);
    CHECK(back.kind == a.kind);
    CHECK(back.acceptance == a.acceptance);
  }
}

TEST_CASE("HOA label expressions and aliases") {
  const std::string text = R"(HOA: v1
States: 2
Start: 0
AP: 3 "p" "q" "r"
Alias: @pq 0 | 1
acc-name: co-Buchi
Acceptance: 1 Fin(0)
/* a comment */
--BODY--
State: 0 {0}
[@pq] 1
[!0 & !1] 0
State: 1
[t] 1
--END--
)";
  const DetAutomaton a = parse_hoa(text);
  CHECK(a.kind == AcceptanceKind::CoBuchi);
  CHECK(a.next(0, 0) == 1);
  CHECK(a.next(0, 1) == 1);
  CHECK(a.next(0, 2) == 0);
  CHECK(a.acceptance == std::vector<unsigned>{1, 0});
}

TEST_CASE("HOA inputs outside the supported fragment") {
  const std::string head = "HOA: v1\nStates: 2\nStart: 0\nAP: 1 \"p\"\nAcceptance: 1 Inf(0)\n--BODY--\n";
  CHECK_THROWS_WITH_AS(parse_hoa(head + "State: 0\n[0] 0\n[0] 1\nState: 1\n--END--\n"), doctest::Contains("nondeterministic"),
                       Error);
  CHECK_THROWS_WITH_AS(parse_hoa(head + "State: 0\n[0] 0 {0}\nState: 1\n--END--\n"),
                       doctest::Contains("transition-based"), Error);
  CHECK_THROWS_WITH_AS(parse_hoa("HOA: v1\nStates: 1\nStart: 0\nAP: 0\nAcceptance: 2 Inf(0) & Inf(1)\n--BODY--\n--END--\n"),
                       doctest::Contains("unsupported acceptance"), Error);
  CHECK_THROWS_WITH_AS(parse_hoa(head + "State: 0\n0\n--END--\n"), doctest::Contains("implicit labels"), Error);
  CHECK_THROWS_AS(parse_hoa("HOA: v2\n"), Error);
  CHECK_THROWS_AS(parse_hoa(head + "State: 0\n[0] 5\n--END--\n"), Error);

  const NondetAutomaton n = parse_hoa_nondet(head + "State: 0\n[0] 0\n[0] 1\nState: 1 {0}\n[0] 1\n--END--\n");
  CHECK(n.edges[0].size() == 2);
  CHECK(n.edges[1].front().mark == 1);
}

TEST_CASE("parity min even acceptance") {
  DetAutomaton a = DetAutomaton::with_states({"p"}, 3, AcceptanceKind::Parity);
  a.next(0, 0) = 1;
  a.next(1, 0) = 2;
  a.next(2, 0) = 0;
  a.acceptance = {3, 1, 2};
  const std::string text = print_hoa(a);
  CHECK(text.find("Acceptance: 4 Inf(0) | (Fin(1) & (Inf(2) | Fin(3)))") != std::string::npos);
  CHECK(parse_hoa(text).acceptance == a.acceptance);
}

TEST_CASE("binding APs to a model") {
  const ModelDocument doc = load_model(fixture("half.json"));
  const LabeledMdp& m = doc.model.base;
  const RunAlphabet r = run_alphabet(m);
  const DetAutomaton raw = load_hoa(fixture("some-a.hoa"));
  const DetAutomaton trace = bind_to_model(raw, m, true);
  CHECK(trace.alphabet == r.symbols);
  CHECK(trace.is_complete());
  for (AutState s = 0; s < trace.num_states(); ++s)
    for (StateId q = 0; q < m.num_states(); ++q) CHECK(trace.next(s, r.state_symbol[q]) == s);
  const DetAutomaton interleaved = bind_to_model(raw, m, false);
  CHECK(interleaved.num_states() == raw.num_states() + 1);

  DetAutomaton bad = raw;
  bad.alphabet[0] = "go,a";
  CHECK_THROWS_AS(bind_to_model(bad, m, true), Error);
}

TEST_CASE("scheduler tables") {
  const LabeledMdp m = load_model(fixture("choice.json")).model.base;
  const auto j = scheduler_to_json(m, Scheduler::memoryless({1, 2, 2}));
  CHECK(j["memoryless"]["s0"] == "sure");
  Scheduler s;
  s.memory_size = 2;
  s.choice[{1, 0}] = {{0, Rational(1, 2)}, {1, Rational(1, 2)}};
  s.update[{0, 0, kAnyLabel, 1}] = {{1, Rational(1)}};
  const auto k = scheduler_to_json(m, s);
  CHECK(k["choice"][0]["actions"]["go"] == "1/2");
  CHECK(k["update"][0]["next"]["1"] == "1/1");
}
