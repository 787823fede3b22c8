#include "doctest.h"

#include "opaq/disclosure.hpp"
#include "opaq/error.hpp"
#include "opaq/gadgets.hpp"
#include "opaq/solve_pomdp.hpp"
#include "support.hpp"

using namespace opaq;
using namespace opaq::testing;

namespace {

// Observation-based memoryless scheduler: one random distribution per class.
Scheduler random_observation_scheduler(Rng& rng, const PartiallyObservableMdp& p) {
  Scheduler s;
  s.observation_based = true;
  std::map<std::size_t, ActionDistribution> per_class;
  for (StateId q = 0; q < p.base.num_states(); ++q) {
    const std::size_t c = p.observation_class[q];
    if (!per_class.count(c)) {
      const auto& cs = p.base.choices[q];
      if (cs.size() == 1 || rng() % 2) {
        per_class[c] = {{cs[rng() % cs.size()].action, Rational(1)}};
      } else {
        const Rational w(1 + static_cast<long>(rng() % 3), 4);
        per_class[c] = {{cs[0].action, w}, {cs[1].action, 1 - w}};
      }
    }
    s.choice[{0, q}] = per_class[c];
  }
  return s;
}

std::vector<StateId> random_target(Rng& rng, std::size_t n) {
  std::vector<StateId> f;
  for (StateId q = 0; q < n; ++q)
    if (rng() % 3 == 0) f.push_back(q);
  if (f.empty()) f.push_back(rng() % n);
  return f;
}

}  // namespace

TEST_CASE("gadget structure") {
  auto rng = make_rng(71);
  for (int round = 0; round < 20; ++round) {
    const PartiallyObservableMdp src = random_pomdp(rng, 3, 2, 2, 2);
    const auto f = random_target(rng, 3);
    const GadgetInstance g = build_gadget(src, f, round % 2 ? AcceptanceKind::Buchi : AcceptanceKind::CoBuchi, round % 3 == 0);
    CHECK(g.gadget.base.num_states() == 1 + 2 * src.base.num_states());
    CHECK(validate(g.gadget).empty());
    CHECK(validate(g.gadget.base, g.projection).empty());
    CHECK(g.secret.is_complete());
    CHECK(g.secret.alphabet == run_alphabet(g.gadget.base).symbols);
    for (StateId q = 0; q < 3; ++q) CHECK(g.gadget.equivalent(g.copy_state[0][q], g.copy_state[1][q]));
  }
}

TEST_CASE("fresh symbols avoid the source alphabet") {
  PartiallyObservableMdp src;
  src.base.states = {"init"};
  src.base.labels = {"a1"};
  src.base.actions = {"alpha_init"};
  src.base.choices = {{{0, {{0, 0, Rational(1)}}}}};
  src.observation_class = {0};
  const GadgetInstance g = build_gadget(src, {0}, AcceptanceKind::Buchi, false);
  CHECK(g.gadget.base.labels[g.branch_label[0]] != "a1");
  CHECK(g.gadget.base.actions[g.init_action] != "alpha_init");
  CHECK(g.gadget.base.states[g.init_state] == "init");
  CHECK(validate(g.gadget).empty());
}

TEST_CASE("gadget disclosure equals the source objective") {
  auto rng = make_rng(72);
  for (int round = 0; round < 16; ++round) {
    const PartiallyObservableMdp src = random_pomdp(rng, 3, 2, 2, 2);
    const auto f = random_target(rng, 3);
    const bool buchi = round % 2 == 0;
    const GadgetInstance g = build_gadget(src, f, buchi ? AcceptanceKind::Buchi : AcceptanceKind::CoBuchi, false);
    const Scheduler sigma = random_observation_scheduler(rng, src);
    REQUIRE(validate(src, sigma).empty());

    std::vector<bool> in_f(3, false);
    for (StateId q : f) in_f[q] = true;
    std::vector<unsigned> objective = buchi_priorities(in_f);
    if (!buchi)
      for (StateId q = 0; q < 3; ++q) objective[q] = in_f[q] ? 1 : 2;
    const MarkovChain sc = induced_chain(src.base, sigma);
    const Rational source_value = chain_omega_probability(sc, lift_priorities(sc, objective));

    const Scheduler lifted = lift_scheduler(sigma, g);
    REQUIRE(validate(g.gadget, lifted).empty());
    const DisclosureAutomaton d = build_discl(g.secret, g.projection, g.gadget.base);
    const ProductPomdp p = product(g.gadget, d.automaton);
    const MarkovChain pc = induced_chain(p.mdp(), lift_to_product(lifted, p));
    CHECK(chain_omega_probability(pc, lift_priorities(pc, p.priority)) == source_value);
  }
}

TEST_CASE("absorbing gadget decides almost-sure reachability") {
  auto rng = make_rng(73);
  for (int round = 0; round < 12; ++round) {
    const PartiallyObservableMdp src = random_pomdp(rng, 3, 2, 2, 2, true);
    const auto f = random_target(rng, 3);
    const GadgetInstance g = build_gadget(src, f, AcceptanceKind::Buchi, true);
    const bool gadget_yes = almost_sure_disclosure_pomdp(g.gadget, g.secret, g.projection).result.yes;
    std::vector<bool> in_f(3, false);
    for (StateId q : f) in_f[q] = true;
    const PartiallyObservableMdp absorbing = make_absorbing(src, f);
    CHECK(gadget_yes == almost_sure_buchi(absorbing, in_f).yes);
    CHECK(gadget_yes == enumerate_scheduler_oracle(absorbing, buchi_priorities(in_f), 3).yes);
  }
}

TEST_CASE("lifting then projecting returns the scheduler") {
  auto rng = make_rng(74);
  const PartiallyObservableMdp src = random_pomdp(rng, 3, 2, 2, 2);
  const GadgetInstance g = build_gadget(src, {0}, AcceptanceKind::Buchi, false);
  const Scheduler sigma = random_observation_scheduler(rng, src);
  const Scheduler back = project_scheduler(lift_scheduler(sigma, g), g);
  for (StateId q = 0; q < 3; ++q) CHECK(back.choice_at(src.base, 0, q) == sigma.choice_at(src.base, 0, q));
  Scheduler not_observation = sigma;
  not_observation.observation_based = false;
  CHECK_THROWS_AS(lift_scheduler(not_observation, g), Error);
}
