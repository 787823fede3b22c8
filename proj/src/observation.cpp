#include "opaq/observation.hpp"

#include "opaq/error.hpp"

#include "graph.hpp"

#include <set>

namespace opaq {

ObsId Projection::of_step(ActionId a, LabelId l) const {
  const auto it = step_obs.find({a, l});
  return it == step_obs.end() ? kErased : it->second;
}

Projection identity_projection(const LabeledMdp& mdp) {
  const RunAlphabet alphabet = run_alphabet(mdp);
  Projection pi;
  pi.observables = alphabet.symbols;
  pi.state_obs = alphabet.state_symbol;
  for (const auto& [step, x] : alphabet.step_symbol) pi.step_obs[step] = x;
  return pi;
}

std::vector<Diagnostic> validate(const LabeledMdp& mdp, const Projection& pi) {
  std::vector<Diagnostic> out;
  std::set<std::string> names;
  for (const std::string& o : pi.observables) {
    if (o.empty()) out.push_back({"projection", "observable names must be nonempty"});
    if (!names.insert(o).second) out.push_back({"projection", "duplicate observable '" + o + "'"});
  }
  if (pi.state_obs.size() > mdp.num_states()) out.push_back({"projection", "more state entries than states"});
  for (ObsId o : pi.state_obs)
    if (o != kErased && o >= pi.observables.size()) out.push_back({"projection", "state mapped to an unknown observable"});
  for (const auto& [step, o] : pi.step_obs) {
    if (step.first >= mdp.actions.size() || step.second >= mdp.labels.size())
      out.push_back({"projection", "step entry for an unknown action or label"});
    if (o != kErased && o >= pi.observables.size()) out.push_back({"projection", "step mapped to an unknown observable"});
  }
  return out;
}

std::vector<ObsId> letter_map(const Projection& pi, const RunAlphabet& alphabet) {
  std::vector<ObsId> out(alphabet.symbols.size(), kErased);
  for (StateId q = 0; q < alphabet.state_symbol.size(); ++q) out[alphabet.state_symbol[q]] = pi.of_state(q);
  for (const auto& [step, x] : alphabet.step_symbol) out[x] = pi.of_step(step.first, step.second);
  return out;
}

namespace {

void observe_into(const Projection& pi, const FiniteRun& run, bool skip_first_state, std::vector<ObsId>& out) {
  auto push = [&](ObsId o) {
    if (o != kErased) out.push_back(o);
  };
  if (!skip_first_state) push(pi.of_state(run.states.front()));
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    push(pi.of_step(run.steps[i].action, run.steps[i].label));
    push(pi.of_state(run.states[i + 1]));
  }
}

}  // namespace

std::vector<ObsId> observe(const Projection& pi, const FiniteRun& run) {
  std::vector<ObsId> out;
  observe_into(pi, run, false, out);
  return out;
}

LassoWord observe(const Projection& pi, const LassoRun& run) {
  LassoWord w;
  observe_into(pi, run.stem, false, w.stem);
  observe_into(pi, run.cycle, true, w.cycle);
  return w;
}

DetAutomaton model_run_automaton(const LabeledMdp& mdp, const RunAlphabet& alphabet) {
  // State 0 reads the first state symbol, 1 + q sits after state symbol q,
  // and one state per (q, action, label) waits for the successor symbol.
  DetAutomaton r = DetAutomaton::with_states(alphabet.symbols, 1 + mdp.num_states(), AcceptanceKind::Buchi);
  for (unsigned& acc : r.acceptance) acc = 1;
  r.initial = 0;
  r.next(0, alphabet.state_symbol[mdp.initial]) = 1 + mdp.initial;
  for (StateId q = 0; q < mdp.num_states(); ++q)
    for (const Choice& c : mdp.choices[q]) {
      std::map<LabelId, AutState> pending;
      for (const Outcome& o : c.outcomes) {
        if (o.probability <= 0) continue;
        auto [it, inserted] = pending.emplace(o.label, 0);
        if (inserted) {
          it->second = r.add_state(1);
          r.next(1 + q, alphabet.step(c.action, o.label)) = it->second;
        }
        r.next(it->second, alphabet.state_symbol[o.target]) = 1 + o.target;
      }
    }
  return r;
}

DetAutomaton restrict_to_model(const DetAutomaton& a, const LabeledMdp& mdp) {
  const RunAlphabet alphabet = run_alphabet(mdp);
  if (a.alphabet != alphabet.symbols) throw Error(ErrorKind::Validation, "automaton alphabet differs from the model run alphabet");
  const DetAutomaton runs = model_run_automaton(mdp, alphabet);
  DetAutomaton r = DetAutomaton::with_states(a.alphabet, 0, a.kind);
  std::map<std::pair<AutState, AutState>, AutState> index;
  std::vector<std::pair<AutState, AutState>> order;
  auto intern = [&](std::pair<AutState, AutState> k) {
    auto [it, inserted] = index.emplace(k, order.size());
    if (inserted) {
      order.push_back(k);
      r.add_state(a.acceptance[k.first]);
    }
    return it->second;
  };
  r.initial = intern({a.initial, runs.initial});
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter x = 0; x < a.num_letters(); ++x) {
      const auto [p, m] = order[i];
      const AutState pn = a.next(p, x);
      const AutState mn = runs.next(m, x);
      if (pn == kNoState || mn == kNoState) continue;
      const AutState t = intern({pn, mn});
      r.next(i, x) = t;
    }
  return complete(std::move(r));
}

NondetAutomaton image_automaton(const NondetAutomaton& a, const Projection& pi, const RunAlphabet& alphabet) {
  if (a.alphabet != alphabet.symbols) throw Error(ErrorKind::Validation, "automaton alphabet differs from the run alphabet");
  const auto map = letter_map(pi, alphabet);
  NondetAutomaton relabeled;
  relabeled.alphabet = pi.observables;
  relabeled.kind = a.kind;
  relabeled.initial = a.initial;
  relabeled.edges.resize(a.num_states());
  for (AutState s = 0; s < a.num_states(); ++s) {
    std::set<NondetEdge> out;
    for (const NondetEdge& e : a.edges[s]) {
      if (e.letter == kEpsilon) throw Error(ErrorKind::Validation, "image_automaton expects an epsilon-free input");
      const ObsId o = map[e.letter];
      out.insert({o == kErased ? kEpsilon : o, e.target, e.mark});
    }
    relabeled.edges[s].assign(out.begin(), out.end());
  }
  return eliminate_epsilon(relabeled);
}

NondetAutomaton image_automaton(const DetAutomaton& a, const Projection& pi, const RunAlphabet& alphabet) {
  if (a.kind == AcceptanceKind::Parity)
    throw Error(ErrorKind::Validation, "image_automaton: convert parity automata with nba_of_parity first");
  return image_automaton(to_nondet(a), pi, alphabet);
}

DetAutomaton inverse_image_automaton(const DetAutomaton& b, const Projection& pi, const RunAlphabet& alphabet) {
  if (b.alphabet != pi.observables) throw Error(ErrorKind::Validation, "automaton alphabet differs from the observables");
  const auto map = letter_map(pi, alphabet);
  DetAutomaton r = DetAutomaton::with_states(alphabet.symbols, b.num_states(), b.kind);
  r.acceptance = b.acceptance;
  r.initial = b.initial;
  for (AutState s = 0; s < b.num_states(); ++s)
    for (Letter x = 0; x < alphabet.symbols.size(); ++x) r.next(s, x) = map[x] == kErased ? s : b.next(s, map[x]);
  return r;
}

DivergenceReport check_observation_divergence(const LabeledMdp& mdp, const Projection& pi) {
  const std::size_t n = mdp.num_states();
  detail::Adjacency all(n), silent(n);
  for (StateId q = 0; q < n; ++q)
    for (const Choice& c : mdp.choices[q])
      for (const Outcome& o : c.outcomes) {
        if (o.probability <= 0) continue;
        all[q].push_back(o.target);
        if (pi.of_step(c.action, o.label) == kErased && pi.of_state(o.target) == kErased) silent[q].push_back(o.target);
      }
  const auto reach = detail::reachable_from(all, {mdp.initial});
  const auto scc = detail::strongly_connected_components(silent, reach);
  DivergenceReport report;
  std::map<std::size_t, std::size_t> slot;
  for (StateId q = 0; q < n; ++q) {
    if (!reach[q] || !detail::is_nontrivial(silent, scc, q)) continue;
    auto [it, inserted] = slot.emplace(scc.component[q], report.silent_cycles.size());
    if (inserted) report.silent_cycles.emplace_back();
    report.silent_cycles[it->second].push_back(q);
  }
  report.divergent = report.silent_cycles.empty();
  for (const auto& cycle : report.silent_cycles) {
    std::string names;
    for (StateId q : cycle) names += (names.empty() ? "" : ", ") + mdp.states[q];
    report.diagnostics.push_back({"divergence", "states {" + names + "} can cycle without any observation"});
  }
  return report;
}

}  // namespace opaq
