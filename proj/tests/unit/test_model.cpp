#include "doctest.h"

#include "opaq/io.hpp"
#include "opaq/model.hpp"
#include "support.hpp"

#include <algorithm>

using namespace opaq;
using opaq::testing::fixture;

namespace {

PartiallyObservableMdp twin() { return load_model(fixture("twin.json")).model; }

bool has_code(const std::vector<Diagnostic>& d, const std::string& code) {
  return std::any_of(d.begin(), d.end(), [&](const Diagnostic& x) { return x.code == code; });
}

StateId id(const LabeledMdp& m, const char* name) { return *m.state_index(name); }
ActionId act(const LabeledMdp& m, const char* name) { return *m.action_index(name); }
LabelId lab(const LabeledMdp& m, const char* name) { return *m.label_index(name); }

}  // namespace

TEST_CASE("twin model validates with its partition") {
  const auto p = twin();
  CHECK(validate(p.base).empty());
  CHECK(validate(p).empty());
  CHECK(p.num_classes() == 3);
  CHECK(p.equivalent(id(p.base, "q0"), id(p.base, "q0'")));
}

TEST_CASE("a distribution summing to 13/12 is reported once") {
  auto m = twin().base;
  m.choices[id(m, "q0")][0].outcomes[1].probability = Rational(1, 3);
  const auto d = validate(m);
  REQUIRE(d.size() == 1);
  CHECK(d[0].code == "distribution-sum");
}

TEST_CASE("structural errors") {
  auto m = twin().base;
  SUBCASE("deadlock") {
    m.choices[id(m, "q1")].clear();
    CHECK(has_code(validate(m), "deadlock"));
  }
  SUBCASE("zero probability") {
    m.choices[id(m, "q1")][0].outcomes[0].probability = 0;
    CHECK(has_code(validate(m), "non-positive"));
  }
  SUBCASE("unknown target") {
    m.choices[id(m, "q1")][0].outcomes[0].target = 17;
    CHECK(has_code(validate(m), "unknown-state"));
  }
  SUBCASE("bad initial state") {
    m.initial = 9;
    CHECK(has_code(validate(m), "initial"));
  }
}

TEST_CASE("classes must agree on enabled actions") {
  auto p = twin();
  p.observation_class[id(p.base, "q1")] = p.observation_class[id(p.base, "q2")];
  CHECK(has_code(validate(p), "equivalence-enabledness"));
}

TEST_CASE("enabled actions of the twin model") {
  const auto m = twin().base;
  CHECK(enabled_actions(m, id(m, "q0")) == std::vector<ActionId>{act(m, "alpha1"), act(m, "alpha2")});
  CHECK(enabled_actions(m, id(m, "q1")) == std::vector<ActionId>{act(m, "beta1")});
  CHECK_THROWS_AS(enabled_actions(m, 99), std::out_of_range);
}

TEST_CASE("cone probabilities under the alpha1 scheduler") {
  const auto m = twin().base;
  std::vector<ActionId> choice(m.num_states());
  for (StateId q = 0; q < m.num_states(); ++q) choice[q] = m.choices[q][0].action;
  choice[id(m, "q0")] = choice[id(m, "q0'")] = act(m, "alpha1");
  const Scheduler s = Scheduler::memoryless(choice);

  FiniteRun r;
  r.states = {id(m, "q0")};
  r = r.extended({act(m, "alpha1"), lab(m, "a")}, id(m, "q1"));
  CHECK(cone_probability(m, s, r) == Rational(3, 4));
  r = r.extended({act(m, "beta1"), lab(m, "o1")}, id(m, "q0"));
  CHECK(cone_probability(m, s, r) == Rational(3, 8));

  FiniteRun bad;
  bad.states = {id(m, "q0"), id(m, "q2")};
  bad.steps = {{act(m, "alpha1"), lab(m, "a")}};
  CHECK_THROWS_AS(cone_probability(m, s, bad), std::invalid_argument);
  CHECK_FALSE(check_run(m, bad).empty());
}

TEST_CASE("uniform memoryless scheduler induces a four-state chain") {
  const auto m = twin().base;
  Scheduler s;
  for (StateId q : {id(m, "q0"), id(m, "q0'")})
    s.choice[{0, q}] = {{act(m, "alpha1"), Rational(1, 2)}, {act(m, "alpha2"), Rational(1, 2)}};
  const MarkovChain c = induced_chain(m, s);
  CHECK(c.size() == 4);
  Rational out_of_q0 = 0;
  for (const ChainEdge& e : c.edges[c.initial]) out_of_q0 += e.probability;
  CHECK(out_of_q0 == 1);
  for (const ChainEdge& e : c.edges[c.initial]) CHECK((e.probability == Rational(3, 8) || e.probability == Rational(1, 8)));
}

TEST_CASE("scheduler validation") {
  const auto p = twin();
  const auto& m = p.base;
  Scheduler s;
  SUBCASE("disabled action") {
    s.choice[{0, id(m, "q1")}] = {{act(m, "alpha1"), Rational(1)}};
    CHECK(has_code(validate(m, s), "scheduler-enabledness"));
  }
  SUBCASE("weights must sum to one") {
    s.choice[{0, id(m, "q0")}] = {{act(m, "alpha1"), Rational(1, 2)}};
    CHECK(has_code(validate(m, s), "scheduler-sum"));
  }
  SUBCASE("observation-based schedulers agree on equivalent states") {
    s.observation_based = true;
    s.choice[{0, id(m, "q0")}] = {{act(m, "alpha1"), Rational(1)}};
    s.choice[{0, id(m, "q0'")}] = {{act(m, "alpha2"), Rational(1)}};
    CHECK(has_code(validate(p, s), "scheduler-observation"));
  }
}

TEST_CASE("parity probability of a chain") {
  const auto m = load_model(fixture("half.json")).model.base;
  const MarkovChain c = induced_chain(m, Scheduler{});
  std::vector<bool> f(m.num_states(), false);
  f[id(m, "s1")] = true;
  const auto prio = lift_priorities(c, buchi_priorities(f));
  CHECK(chain_omega_probability(c, prio) == Rational(1, 2));
}

TEST_CASE("cone probabilities of all runs of a given length sum to one") {
  auto rng = opaq::testing::make_rng(11);
  for (int round = 0; round < 20; ++round) {
    const LabeledMdp m = opaq::testing::random_mdp(rng, 3, 2, 2);
    REQUIRE(validate(m).empty());
    std::vector<FiniteRun> runs(1);
    runs[0].states = {m.initial};
    for (int len = 0; len < 3; ++len) {
      std::vector<FiniteRun> next;
      for (const FiniteRun& r : runs)
        for (const Choice& c : m.choices[r.last()])
          if (c.action == m.choices[r.last()][0].action)
            for (const Outcome& o : c.outcomes) next.push_back(r.extended({c.action, o.label}, o.target));
      runs = std::move(next);
    }
    Rational total = 0;
    for (const FiniteRun& r : runs) total += cone_probability(m, Scheduler{}, r);
    CHECK(total == 1);
  }
}
