#include "opaq/gadgets.hpp"

#include "opaq/disclosure.hpp"
#include "opaq/error.hpp"

#include <algorithm>
#include <set>

namespace opaq {

GadgetInstance build_gadget(const PartiallyObservableMdp& source, const std::vector<StateId>& target,
                            AcceptanceKind acceptance, bool absorbing) {
  if (acceptance == AcceptanceKind::Parity) throw Error(ErrorKind::Validation, "gadget acceptance must be Buchi or co-Buchi");
  const LabeledMdp& a = source.base;
  const std::size_t n = a.num_states();
  std::vector<bool> in_target(n, false);
  for (StateId q : target) {
    if (q >= n) throw Error(ErrorKind::Validation, "target state outside the model");
    in_target[q] = true;
  }

  GadgetInstance g;
  g.source_states = n;
  g.target = target;
  std::sort(g.target.begin(), g.target.end());
  g.target.erase(std::unique(g.target.begin(), g.target.end()), g.target.end());
  g.acceptance = acceptance;
  g.absorbing = absorbing;

  LabeledMdp& m = g.gadget.base;
  m.labels = a.labels;
  g.branch_label[0] = m.labels.size();
  m.labels.push_back(fresh_name("a1", m.labels));
  g.branch_label[1] = m.labels.size();
  m.labels.push_back(fresh_name("a2", m.labels));
  m.actions = a.actions;
  g.init_action = m.actions.size();
  m.actions.push_back(fresh_name("alpha_init", m.actions));

  std::vector<std::string> copies;
  for (int i = 0; i < 2; ++i)
    for (StateId q = 0; q < n; ++q) copies.push_back(a.states[q] + "^" + std::to_string(i + 1));
  g.init_state = 0;
  m.states.push_back(fresh_name("init", copies));
  m.states.insert(m.states.end(), copies.begin(), copies.end());
  for (int i = 0; i < 2; ++i) {
    g.copy_state[i].resize(n);
    for (StateId q = 0; q < n; ++q) g.copy_state[i][q] = 1 + i * n + q;
  }
  m.initial = g.init_state;

  m.choices.resize(1 + 2 * n);
  m.choices[g.init_state].push_back(
      {g.init_action,
       {{g.branch_label[0], g.copy_state[0][a.initial], Rational(1, 2)},
        {g.branch_label[1], g.copy_state[1][a.initial], Rational(1, 2)}}});
  for (int i = 0; i < 2; ++i)
    for (StateId q = 0; q < n; ++q) {
      auto& out = m.choices[g.copy_state[i][q]];
      for (const Choice& c : a.choices[q]) {
        if (i == 0 && absorbing && in_target[q] && !c.outcomes.empty()) {
          out.push_back({c.action, {{c.outcomes.front().label, g.copy_state[0][q], Rational(1)}}});
          continue;
        }
        Choice copied{c.action, {}};
        for (const Outcome& o : c.outcomes) copied.outcomes.push_back({o.label, g.copy_state[i][o.target], o.probability});
        out.push_back(std::move(copied));
      }
    }

  // Duplicates and source-equivalent states share a class; the initial state has its own.
  const std::size_t classes = source.num_classes();
  g.gadget.observation_class.assign(1 + 2 * n, classes);
  for (int i = 0; i < 2; ++i)
    for (StateId q = 0; q < n; ++q) g.gadget.observation_class[g.copy_state[i][q]] = source.observation_class[q];
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t& c : g.gadget.observation_class) c = dense.emplace(c, dense.size()).first->second;

  // Both copies are observed as the source run.
  const RunAlphabet source_alphabet = run_alphabet(a);
  Projection& pi = g.projection;
  pi.observables = source_alphabet.symbols;
  pi.state_obs.assign(1 + 2 * n, kErased);
  for (int i = 0; i < 2; ++i)
    for (StateId q = 0; q < n; ++q) pi.state_obs[g.copy_state[i][q]] = source_alphabet.state_symbol[q];
  for (const auto& [step, x] : source_alphabet.step_symbol) pi.step_obs[step] = x;

  const RunAlphabet alphabet = run_alphabet(m);
  enum : AutState { kInit, kBranch, kOutside, kInside, kAll, kSink };
  DetAutomaton& s = g.secret;
  s = DetAutomaton::with_states(alphabet.symbols, 6, acceptance);
  s.initial = kInit;
  for (Letter x = 0; x < alphabet.symbols.size(); ++x) {
    for (AutState st : {kInit, kBranch, kOutside, kInside, kSink}) s.next(st, x) = kSink;
    s.next(kAll, x) = kAll;
  }
  s.next(kInit, alphabet.state_symbol[g.init_state]) = kBranch;
  s.next(kBranch, alphabet.step(g.init_action, g.branch_label[0])) = kOutside;
  s.next(kBranch, alphabet.step(g.init_action, g.branch_label[1])) = kAll;
  for (AutState st : {kOutside, kInside}) {
    for (StateId q = 0; q < n; ++q) s.next(st, alphabet.state_symbol[g.copy_state[0][q]]) = in_target[q] ? kInside : kOutside;
    for (const auto& [step, x] : alphabet.step_symbol)
      if (step.first != g.init_action) s.next(st, x) = kOutside;
  }
  if (acceptance == AcceptanceKind::Buchi) {
    s.acceptance[kInside] = 1;
    s.acceptance[kAll] = 1;
  } else {
    s.acceptance[kInside] = 1;
    s.acceptance[kSink] = 1;
  }
  return g;
}

PartiallyObservableMdp make_absorbing(const PartiallyObservableMdp& source, const std::vector<StateId>& target) {
  PartiallyObservableMdp out = source;
  for (StateId q : target) {
    if (q >= out.base.num_states()) throw Error(ErrorKind::Validation, "target state outside the model");
    for (Choice& c : out.base.choices[q])
      if (!c.outcomes.empty()) c.outcomes = {{c.outcomes.front().label, q, Rational(1)}};
  }
  return out;
}

Scheduler lift_scheduler(const Scheduler& sigma, const GadgetInstance& g) {
  if (!sigma.observation_based) throw Error(ErrorKind::Validation, "lift_scheduler expects an observation-based scheduler");
  Scheduler out;
  out.observation_based = true;
  out.memory_size = sigma.memory_size;
  out.initial_memory = sigma.initial_memory;
  out.memory_names = sigma.memory_names;
  for (MemoryId m = 0; m < sigma.memory_size; ++m) out.choice[{m, g.init_state}] = {{g.init_action, Rational(1)}};
  for (const auto& [key, dist] : sigma.choice)
    for (int i = 0; i < 2; ++i) out.choice[{key.first, g.copy_state[i][key.second]}] = dist;
  for (const auto& [key, dist] : sigma.update)
    for (int i = 0; i < 2; ++i) out.update[{key.memory, key.action, kAnyLabel, g.copy_state[i][key.state]}] = dist;
  return out;
}

Scheduler project_scheduler(const Scheduler& sigma, const GadgetInstance& g) {
  if (!sigma.observation_based) throw Error(ErrorKind::Validation, "project_scheduler expects an observation-based scheduler");
  const LabeledMdp& m = g.gadget.base;
  const StateId entry = m.choices[g.init_state].front().outcomes.front().target;
  const auto start = sigma.update_at(sigma.initial_memory, g.init_action, kAnyLabel, entry);
  if (start.size() != 1 || start.front().weight != 1)
    throw Error(ErrorKind::Validation, "project_scheduler expects a deterministic memory update on the init step");

  Scheduler out;
  out.observation_based = true;
  out.memory_size = sigma.memory_size;
  out.initial_memory = start.front().memory;
  out.memory_names = sigma.memory_names;
  for (MemoryId mem = 0; mem < sigma.memory_size; ++mem)
    for (StateId q = 0; q < g.source_states; ++q) out.choice[{mem, q}] = sigma.choice_at(m, mem, g.copy_state[0][q]);
  for (const auto& [key, dist] : sigma.update) {
    if (key.action == g.init_action) continue;
    const auto it = std::find(g.copy_state[0].begin(), g.copy_state[0].end(), key.state);
    if (it == g.copy_state[0].end()) continue;
    out.update[{key.memory, key.action, kAnyLabel, static_cast<StateId>(it - g.copy_state[0].begin())}] = dist;
  }
  return out;
}

}  // namespace opaq
