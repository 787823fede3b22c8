#include "opaq/disclosure.hpp"

#include "opaq/error.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace opaq {

namespace {

void require_divergent(const LabeledMdp& model, const Projection& pi) {
  const auto report = check_observation_divergence(model, pi);
  if (!report.divergent)
    throw Error(ErrorKind::Validation, "projection is not divergent: " + report.diagnostics.front().message);
}

DetAutomaton prepared_secret(const DetAutomaton& secret, const RunAlphabet& alphabet) {
  if (secret.alphabet != alphabet.symbols) throw Error(ErrorKind::Validation, "secret alphabet differs from the model run alphabet");
  return complete(secret);
}

}  // namespace

DisclosureAutomaton build_discl_dba(const DetAutomaton& secret_in, const Projection& pi, const LabeledMdp& model) {
  if (secret_in.kind != AcceptanceKind::Buchi) throw Error(ErrorKind::Validation, "build_discl_dba expects a Buchi secret");
  require_divergent(model, pi);
  const RunAlphabet alphabet = run_alphabet(model);
  const DetAutomaton secret = prepared_secret(secret_in, alphabet);
  DisclosureAutomaton out;
  auto record = [&](const char* name, std::size_t n) { out.provenance.push_back({name, n}); };
  record("secret", secret.num_states());

  const DetAutomaton others = restrict_to_model(dualize(secret), model);
  record("complement-on-model", others.num_states());
  const NondetAutomaton seen = image_automaton(others, pi, alphabet);
  record("image", seen.num_states());
  const DetAutomaton seen_det = miyano_hayashi(seen);
  record("breakpoint", seen_det.num_states());
  const DetAutomaton covered = inverse_image_automaton(seen_det, pi, alphabet);
  const DetAutomaton uncovered = dualize(covered);
  record("inverse-image", uncovered.num_states());
  out.automaton = trim(intersect_dba(secret, uncovered));
  record("disclosure", out.automaton.num_states());
  return out;
}

DisclosureAutomaton build_discl_dpa(const DetAutomaton& secret_in, const Projection& pi, const LabeledMdp& model) {
  require_divergent(model, pi);
  const RunAlphabet alphabet = run_alphabet(model);
  const DetAutomaton secret = as_parity(prepared_secret(secret_in, alphabet));
  DisclosureAutomaton out;
  auto record = [&](const char* name, std::size_t n) { out.provenance.push_back({name, n}); };
  record("secret", secret.num_states());

  const DetAutomaton others = restrict_to_model(dualize(secret), model);
  record("complement-on-model", others.num_states());
  const NondetAutomaton others_nba = nba_of_parity(to_nondet(others));
  record("complement-nba", others_nba.num_states());
  const NondetAutomaton seen = image_automaton(others_nba, pi, alphabet);
  record("image", seen.num_states());
  const DetAutomaton seen_det = determinize_nba(seen);
  record("image-determinized", seen_det.num_states());
  const DetAutomaton uncovered = inverse_image_automaton(dualize(seen_det), pi, alphabet);
  record("inverse-image", uncovered.num_states());
  const DetAutomaton secret_on_model = restrict_to_model(secret, model);
  const NondetAutomaton both =
      intersect_nba(nba_of_parity(to_nondet(secret_on_model)), nba_of_parity(to_nondet(uncovered)));
  record("intersection-nba", both.num_states());
  out.automaton = trim(determinize_nba(both));
  record("disclosure", out.automaton.num_states());
  return out;
}

DisclosureAutomaton build_discl(const DetAutomaton& secret, const Projection& pi, const LabeledMdp& model) {
  return secret.kind == AcceptanceKind::Buchi ? build_discl_dba(secret, pi, model) : build_discl_dpa(secret, pi, model);
}

std::string fresh_name(std::string base, const std::vector<std::string>& taken) {
  while (std::find(taken.begin(), taken.end(), base) != taken.end()) base += "'";
  return base;
}

ProductPomdp product(const PartiallyObservableMdp& model, const DetAutomaton& d_in) {
  const LabeledMdp& mdp = model.base;
  const RunAlphabet alphabet = run_alphabet(mdp);
  if (d_in.alphabet != alphabet.symbols) throw Error(ErrorKind::Validation, "automaton alphabet differs from the model run alphabet");
  const DetAutomaton d = complete(d_in);
  const auto prio = state_priorities(d);

  ProductPomdp p;
  LabeledMdp& out = p.pomdp.base;
  out.labels = mdp.labels;
  out.actions = mdp.actions;
  p.init_label = out.labels.size();
  out.labels.push_back(fresh_name("iota", mdp.labels));
  p.init_action = out.actions.size();
  out.actions.push_back(fresh_name("iota", mdp.actions));

  std::map<ProductState, StateId> index;
  std::set<std::string> names;
  auto intern = [&](ProductState s) {
    auto [it, inserted] = index.emplace(s, p.meta.size());
    if (inserted) {
      p.meta.push_back(s);
      std::string name = mdp.states[s.model_state] + (s.pending ? "?" : "") + "|" + std::to_string(s.automaton_state);
      while (!names.insert(name).second) name += "'";
      out.states.push_back(std::move(name));
      out.choices.emplace_back();
      p.priority.push_back(prio[s.automaton_state]);
      if (d.kind == AcceptanceKind::Buchi) p.accepting.push_back(d.acceptance[s.automaton_state] != 0);
      p.pomdp.observation_class.push_back(2 * model.observation_class[s.model_state] + (s.pending ? 1 : 0));
    }
    return it->second;
  };
  out.initial = intern({mdp.initial, true, d.initial});
  for (StateId i = 0; i < p.meta.size(); ++i) {
    const ProductState cur = p.meta[i];
    std::vector<Choice> choices;
    if (cur.pending) {
      const AutState next = d.next(cur.automaton_state, alphabet.state_symbol[cur.model_state]);
      const StateId t = intern({cur.model_state, false, next});
      choices.push_back({p.init_action, {{p.init_label, t, Rational(1)}}});
    } else {
      for (const Choice& c : mdp.choices[cur.model_state]) {
        Choice lifted{c.action, {}};
        for (const Outcome& o : c.outcomes) {
          const AutState next = d.next(cur.automaton_state, alphabet.step(c.action, o.label));
          lifted.outcomes.push_back({o.label, intern({o.target, true, next}), o.probability});
        }
        choices.push_back(std::move(lifted));
      }
    }
    out.choices[i] = std::move(choices);
  }
  // Renumber observation classes densely in order of first appearance.
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t& c : p.pomdp.observation_class) c = dense.emplace(c, dense.size()).first->second;
  return p;
}

ProductPomdp product(const LabeledMdp& model, const DetAutomaton& d) { return product(with_identity_partition(model), d); }

ProjectedRun project_run(const ProductPomdp& product, const FiniteRun& run) {
  if (auto e = check_run(product.mdp(), run); !e.empty()) throw std::invalid_argument("invalid product run: " + e);
  ProjectedRun out;
  out.model_run.states.push_back(product.meta[run.states.front()].model_state);
  out.automaton_run.push_back(product.meta[run.states.front()].automaton_state);
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const ProductState& next = product.meta[run.states[i + 1]];
    out.automaton_run.push_back(next.automaton_state);
    if (run.steps[i].action == product.init_action) continue;
    out.model_run.states.push_back(next.model_state);
    out.model_run.steps.push_back(run.steps[i]);
  }
  return out;
}

Scheduler lift_to_product(const Scheduler& sigma, const ProductPomdp& product) {
  Scheduler out;
  out.memory_size = sigma.memory_size;
  out.initial_memory = sigma.initial_memory;
  out.observation_based = sigma.observation_based;
  out.memory_names = sigma.memory_names;
  for (StateId s = 0; s < product.meta.size(); ++s) {
    const ProductState& ps = product.meta[s];
    for (MemoryId m = 0; m < sigma.memory_size; ++m) {
      if (ps.pending) {
        out.choice[{m, s}] = {{product.init_action, Rational(1)}};
        continue;
      }
      auto it = sigma.choice.find({m, ps.model_state});
      if (it != sigma.choice.end()) out.choice[{m, s}] = it->second;
    }
  }
  // Memory moves on the model step, which lands in a pending state.
  for (const auto& [key, dist] : sigma.update)
    for (StateId s = 0; s < product.meta.size(); ++s)
      if (product.meta[s].pending && product.meta[s].model_state == key.state)
        out.update[{key.memory, key.action, key.label, s}] = dist;
  return out;
}

}  // namespace opaq
