#include "doctest.h"

#include "opaq/hoa.hpp"
#include "opaq/io.hpp"
#include "opaq/observation.hpp"
#include "support.hpp"

using namespace opaq;
using namespace opaq::testing;

namespace {

ModelDocument twin() { return load_model(fixture("twin.json")); }

// Is the lasso word the word of a run of the model from its initial state?
bool is_model_run_word(const LabeledMdp& m, const RunAlphabet& r, const LassoWord& w) {
  if (w.cycle.size() % 2) return false;
  std::vector<Letter> word = w.stem;
  for (int rep = 0; rep < 2; ++rep) word.insert(word.end(), w.cycle.begin(), w.cycle.end());
  if (word.empty() || word[0] != r.state_symbol[m.initial]) return false;
  for (std::size_t i = 0; i + 2 < word.size(); i += 2) {
    if (!r.is_state_symbol(word[i]) || r.is_state_symbol(word[i + 1]) || !r.is_state_symbol(word[i + 2])) return false;
    bool ok = false;
    for (const auto& [step, x] : r.step_symbol) {
      if (x != word[i + 1]) continue;
      const Choice* c = m.find_choice(word[i], step.first);
      if (!c) continue;
      for (const Outcome& o : c->outcomes) ok = ok || (o.label == step.second && o.target == word[i + 2]);
    }
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("observing a run of the twin model") {
  const auto doc = twin();
  const auto& m = doc.model.base;
  FiniteRun r;
  r.states = {*m.state_index("q0")};
  r = r.extended({*m.action_index("alpha1"), *m.label_index("a")}, *m.state_index("q1"));
  r = r.extended({*m.action_index("beta1"), *m.label_index("o1")}, *m.state_index("q0"));
  const auto obs = observe(*doc.projection, r);
  REQUIRE(obs.size() == 1);
  CHECK(doc.projection->observables[obs[0]] == "o1");
}

TEST_CASE("a fully erased cycle gives a finite observation") {
  const auto m = load_model(fixture("half.json")).model.base;
  Projection pi = identity_projection(m);
  pi.step_obs.clear();
  pi.state_obs.assign(m.num_states(), kErased);
  pi.state_obs[0] = 0;
  LassoRun l;
  l.stem.states = {0};
  l.stem = l.stem.extended({*m.action_index("go"), *m.label_index("a")}, 1);
  l.cycle.states = {1};
  l.cycle = l.cycle.extended({*m.action_index("loop"), *m.label_index("o1")}, 1);
  const LassoWord w = observe(pi, l);
  CHECK(w.stem.size() == 1);
  CHECK(w.cycle.empty());
}

TEST_CASE("divergence") {
  const auto doc = twin();
  CHECK(check_observation_divergence(doc.model.base, *doc.projection).divergent);
  Projection none = *doc.projection;
  none.step_obs.clear();
  const DivergenceReport r = check_observation_divergence(doc.model.base, none);
  CHECK_FALSE(r.divergent);
  CHECK_FALSE(r.silent_cycles.empty());
  CHECK_FALSE(r.diagnostics.empty());
  const auto half = load_model(fixture("half.json")).model.base;
  Projection loops;
  loops.observables = {"o"};
  loops.state_obs.assign(half.num_states(), kErased);
  loops.step_obs[{*half.action_index("loop"), *half.label_index("o1")}] = 0;
  loops.step_obs[{*half.action_index("loop"), *half.label_index("o2")}] = 0;
  CHECK(check_observation_divergence(half, loops).divergent);
}

TEST_CASE("model-run automaton accepts exactly the model runs") {
  auto rng = make_rng(31);
  for (int round = 0; round < 10; ++round) {
    const LabeledMdp m = random_mdp(rng, 2, 2, 2);
    const RunAlphabet r = run_alphabet(m);
    const DetAutomaton a = model_run_automaton(m, r);
    for (const LassoRun& l : model_lassos(m, 2, 2)) CHECK(accepts_lasso(a, lasso_word(r, l)));
    for (const LassoWord& w : all_lassos(r.symbols.size(), 2, 2))
      if (!is_model_run_word(m, r, w)) REQUIRE_FALSE(accepts_lasso(a, w));
  }
}

TEST_CASE("inverse image reads observations of model runs") {
  auto rng = make_rng(32);
  for (int round = 0; round < 25; ++round) {
    const LabeledMdp m = random_mdp(rng, 3, 2, 2);
    const Projection pi = random_projection(rng, m);
    const RunAlphabet r = run_alphabet(m);
    const DetAutomaton b = random_det(rng, 3, 2, round % 2 ? AcceptanceKind::Buchi : AcceptanceKind::Parity);
    DetAutomaton over_obs = b;
    over_obs.alphabet = pi.observables;
    const DetAutomaton inv = inverse_image_automaton(over_obs, pi, r);
    CHECK(inv.is_complete());
    for (const LassoRun& l : model_lassos(m, 3, 3, 2000))
      REQUIRE(accepts_lasso(inv, lasso_word(r, l)) == accepts_lasso(over_obs, observe(pi, l)));
  }
}

TEST_CASE("image of a model-restricted automaton") {
  auto rng = make_rng(33);
  for (int round = 0; round < 25; ++round) {
    const LabeledMdp m = random_mdp(rng, 2, 2, 2);
    const Projection pi = random_projection(rng, m);
    const RunAlphabet r = run_alphabet(m);
    DetAutomaton a = random_det(rng, 2, r.symbols.size(), round % 2 ? AcceptanceKind::Buchi : AcceptanceKind::CoBuchi);
    a.alphabet = r.symbols;
    const NondetAutomaton img = image_automaton(restrict_to_model(a, m), pi, r);
    CHECK_FALSE(img.has_epsilon());
    for (const LassoWord& w : all_lassos(2, 3, 3))
      REQUIRE(nondet_accepts(img, w) == brute_observation_run(m, a, pi, w, 0));
  }
}

TEST_CASE("projection validation") {
  const auto doc = twin();
  CHECK(validate(doc.model.base, *doc.projection).empty());
  Projection bad = *doc.projection;
  bad.state_obs.push_back(kErased);
  CHECK_FALSE(validate(doc.model.base, bad).empty());
  bad = *doc.projection;
  bad.step_obs.begin()->second = 9;
  CHECK_FALSE(validate(doc.model.base, bad).empty());
}

TEST_CASE("complement secret image on the twin model accepts every observation") {
  const auto doc = twin();
  const auto& m = doc.model.base;
  const RunAlphabet r = run_alphabet(m);
  const DetAutomaton secret = bind_to_model(load_hoa(fixture("alternation.hoa")), m, true);
  const NondetAutomaton img = image_automaton(restrict_to_model(dualize(secret), m), *doc.projection, r);
  for (const LassoWord& w : all_lassos(2, 3, 3)) CHECK(nondet_accepts(img, w));
}
