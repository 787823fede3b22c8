#include "opaq/model.hpp"

#include "graph.hpp"
#include "linear.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>

namespace opaq {

namespace {

template <class Names>
std::optional<std::size_t> find_name(const Names& names, std::string_view name) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::string state_name(const LabeledMdp& mdp, StateId q) {
  return q < mdp.states.size() ? mdp.states[q] : "#" + std::to_string(q);
}

std::string action_name(const LabeledMdp& mdp, ActionId a) {
  return a < mdp.actions.size() ? mdp.actions[a] : "#" + std::to_string(a);
}

}  // namespace

const Choice* LabeledMdp::find_choice(StateId q, ActionId a) const {
  if (q >= choices.size()) return nullptr;
  for (const Choice& c : choices[q])
    if (c.action == a) return &c;
  return nullptr;
}

std::optional<StateId> LabeledMdp::state_index(std::string_view name) const { return find_name(states, name); }
std::optional<ActionId> LabeledMdp::action_index(std::string_view name) const { return find_name(actions, name); }
std::optional<LabelId> LabeledMdp::label_index(std::string_view name) const { return find_name(labels, name); }

std::size_t PartiallyObservableMdp::num_classes() const {
  std::size_t n = 0;
  for (std::size_t c : observation_class) n = std::max(n, c + 1);
  return n;
}

PartiallyObservableMdp with_identity_partition(LabeledMdp mdp) {
  PartiallyObservableMdp pomdp;
  pomdp.observation_class.resize(mdp.num_states());
  for (StateId q = 0; q < mdp.num_states(); ++q) pomdp.observation_class[q] = q;
  pomdp.base = std::move(mdp);
  return pomdp;
}

std::vector<Diagnostic> validate(const LabeledMdp& mdp) {
  std::vector<Diagnostic> out;
  const std::size_t n = mdp.num_states();
  if (n == 0) out.push_back({"empty-model", "model has no states"});
  if (mdp.initial >= n) out.push_back({"initial", "initial state is not a model state"});
  if (mdp.choices.size() != n) {
    out.push_back({"shape", "transition table does not match the state count"});
    return out;
  }
  for (StateId q = 0; q < n; ++q) {
    const auto& cs = mdp.choices[q];
    if (cs.empty()) out.push_back({"deadlock", "state '" + state_name(mdp, q) + "' has no enabled action"});
    std::set<ActionId> seen;
    for (const Choice& c : cs) {
      const std::string where = "(" + state_name(mdp, q) + ", " + action_name(mdp, c.action) + ")";
      if (c.action >= mdp.actions.size()) out.push_back({"unknown-action", "unknown action in " + where});
      if (!seen.insert(c.action).second) out.push_back({"duplicate-action", "action defined twice in " + where});
      Rational sum = 0;
      std::set<std::pair<LabelId, StateId>> pairs;
      for (const Outcome& o : c.outcomes) {
        if (o.label >= mdp.labels.size()) out.push_back({"unknown-label", "unknown label in " + where});
        if (o.target >= n) out.push_back({"unknown-state", "unknown successor in " + where});
        if (o.probability <= 0) out.push_back({"non-positive", "non-positive probability in " + where});
        if (!pairs.insert({o.label, o.target}).second)
          out.push_back({"duplicate-outcome", "outcome listed twice in " + where});
        sum += o.probability;
      }
      if (sum != 1)
        out.push_back({"distribution-sum", "distribution sum " + to_string(sum) + " != 1 in " + where});
    }
  }
  return out;
}

std::vector<Diagnostic> validate(const PartiallyObservableMdp& pomdp) {
  auto out = validate(pomdp.base);
  const auto& mdp = pomdp.base;
  if (pomdp.observation_class.size() != mdp.num_states()) {
    out.push_back({"partition", "observation partition does not cover every state"});
    return out;
  }
  if (mdp.choices.size() != mdp.num_states()) return out;
  for (StateId p = 0; p < mdp.num_states(); ++p)
    for (StateId q = p + 1; q < mdp.num_states(); ++q) {
      if (!pomdp.equivalent(p, q)) continue;
      std::vector<ActionId> ap, aq;
      for (const Choice& c : mdp.choices[p]) ap.push_back(c.action);
      for (const Choice& c : mdp.choices[q]) aq.push_back(c.action);
      std::sort(ap.begin(), ap.end());
      std::sort(aq.begin(), aq.end());
      if (ap != aq)
        out.push_back({"equivalence-enabledness", "equivalent states '" + state_name(mdp, p) + "' and '" +
                                                      state_name(mdp, q) + "' enable different actions"});
    }
  return out;
}

std::vector<ActionId> enabled_actions(const LabeledMdp& mdp, StateId q) {
  if (q >= mdp.num_states() || q >= mdp.choices.size()) throw std::out_of_range("unknown state");
  std::vector<ActionId> out;
  for (const Choice& c : mdp.choices[q]) out.push_back(c.action);
  return out;
}

FiniteRun FiniteRun::extended(Step step, StateId next) const {
  FiniteRun r = *this;
  r.steps.push_back(step);
  r.states.push_back(next);
  return r;
}

FiniteRun FiniteRun::concat(const FiniteRun& other) const {
  FiniteRun r = *this;
  r.steps.insert(r.steps.end(), other.steps.begin(), other.steps.end());
  r.states.insert(r.states.end(), other.states.begin() + 1, other.states.end());
  return r;
}

namespace {

Rational transition_probability(const LabeledMdp& mdp, StateId q, Step s, StateId next) {
  const Choice* c = mdp.find_choice(q, s.action);
  if (c == nullptr) return 0;
  for (const Outcome& o : c->outcomes)
    if (o.label == s.label && o.target == next) return o.probability;
  return 0;
}

}  // namespace

std::string check_run(const LabeledMdp& mdp, const FiniteRun& run) {
  if (run.states.size() != run.steps.size() + 1) return "run shape mismatch";
  for (StateId q : run.states)
    if (q >= mdp.num_states()) return "unknown state in run";
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const StateId q = run.states[i];
    if (mdp.find_choice(q, run.steps[i].action) == nullptr)
      return "action '" + action_name(mdp, run.steps[i].action) + "' not enabled in '" + state_name(mdp, q) + "'";
    if (transition_probability(mdp, q, run.steps[i], run.states[i + 1]) <= 0)
      return "step " + std::to_string(i) + " has probability 0";
  }
  return {};
}

std::string check_lasso(const LabeledMdp& mdp, const LassoRun& lasso) {
  if (auto e = check_run(mdp, lasso.stem); !e.empty()) return "stem: " + e;
  if (auto e = check_run(mdp, lasso.cycle); !e.empty()) return "cycle: " + e;
  if (lasso.cycle.steps.empty()) return "cycle is empty";
  if (lasso.cycle.states.front() != lasso.stem.last()) return "cycle does not start at the end of the stem";
  if (lasso.cycle.last() != lasso.cycle.states.front()) return "cycle is not closed";
  return {};
}

ActionDistribution Scheduler::choice_at(const LabeledMdp& mdp, MemoryId m, StateId q) const {
  if (auto it = choice.find({m, q}); it != choice.end()) return it->second;
  if (q < mdp.choices.size() && !mdp.choices[q].empty()) return {{mdp.choices[q].front().action, Rational(1)}};
  return {};
}

MemoryDistribution Scheduler::update_at(MemoryId m, ActionId action, LabelId label, StateId next) const {
  if (!observation_based && label != kAnyLabel) {
    if (auto it = update.find({m, action, label, next}); it != update.end()) return it->second;
  }
  if (auto it = update.find({m, action, kAnyLabel, next}); it != update.end()) return it->second;
  return {{m, Rational(1)}};
}

Scheduler Scheduler::memoryless(const std::vector<ActionId>& action_of) {
  Scheduler s;
  for (StateId q = 0; q < action_of.size(); ++q) s.choice[{0, q}] = {{action_of[q], Rational(1)}};
  return s;
}

std::vector<Diagnostic> validate(const LabeledMdp& mdp, const Scheduler& scheduler) {
  std::vector<Diagnostic> out;
  if (scheduler.memory_size == 0 || scheduler.initial_memory >= scheduler.memory_size)
    out.push_back({"scheduler-memory", "initial memory outside the memory set"});
  for (const auto& [key, dist] : scheduler.choice) {
    const auto [m, q] = key;
    if (m >= scheduler.memory_size || q >= mdp.num_states()) {
      out.push_back({"scheduler-domain", "choice entry outside M x Q"});
      continue;
    }
    Rational sum = 0;
    for (const ActionWeight& w : dist) {
      if (w.weight > 0 && mdp.find_choice(q, w.action) == nullptr)
        out.push_back({"scheduler-enabledness",
                       "action '" + action_name(mdp, w.action) + "' chosen but not enabled in '" + state_name(mdp, q) + "'"});
      if (w.weight < 0) out.push_back({"scheduler-negative", "negative action weight"});
      sum += w.weight;
    }
    if (sum != 1) out.push_back({"scheduler-sum", "action distribution does not sum to 1"});
  }
  for (const auto& [key, dist] : scheduler.update) {
    if (scheduler.observation_based && key.label != kAnyLabel)
      out.push_back({"scheduler-label", "observation-based update reads the transition label"});
    Rational sum = 0;
    for (const MemoryWeight& w : dist) {
      if (w.memory >= scheduler.memory_size) out.push_back({"scheduler-memory", "update targets unknown memory"});
      sum += w.weight;
    }
    if (sum != 1) out.push_back({"scheduler-sum", "memory distribution does not sum to 1"});
  }
  return out;
}

std::vector<Diagnostic> validate(const PartiallyObservableMdp& pomdp, const Scheduler& scheduler) {
  auto out = validate(pomdp.base, scheduler);
  if (!scheduler.observation_based) return out;
  const auto& mdp = pomdp.base;
  for (MemoryId m = 0; m < scheduler.memory_size; ++m)
    for (StateId p = 0; p < mdp.num_states(); ++p)
      for (StateId q = p + 1; q < mdp.num_states(); ++q)
        if (pomdp.equivalent(p, q) && scheduler.choice_at(mdp, m, p) != scheduler.choice_at(mdp, m, q))
          out.push_back({"scheduler-observation", "choice differs on equivalent states '" + state_name(mdp, p) +
                                                      "' and '" + state_name(mdp, q) + "'"});
  for (const auto& [key, dist] : scheduler.update)
    for (StateId q = 0; q < mdp.num_states(); ++q)
      if (q != key.state && pomdp.equivalent(q, key.state) &&
          scheduler.update_at(key.memory, key.action, kAnyLabel, q) != dist)
        out.push_back({"scheduler-observation", "memory update distinguishes equivalent states"});
  return out;
}

Rational cone_probability(const LabeledMdp& mdp, const Scheduler& scheduler, const FiniteRun& run) {
  if (auto e = check_run(mdp, run); !e.empty()) throw std::invalid_argument("invalid run: " + e);
  if (run.states.front() != mdp.initial) throw std::invalid_argument("invalid run: does not start in the initial state");
  std::map<MemoryId, Rational> mass{{scheduler.initial_memory, Rational(1)}};
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    const StateId q = run.states[i];
    const StateId next = run.states[i + 1];
    const Step step = run.steps[i];
    const Rational p = transition_probability(mdp, q, step, next);
    std::map<MemoryId, Rational> updated;
    for (const auto& [m, w] : mass) {
      Rational choose = 0;
      for (const ActionWeight& aw : scheduler.choice_at(mdp, m, q))
        if (aw.action == step.action) choose += aw.weight;
      if (choose == 0) continue;
      for (const MemoryWeight& mw : scheduler.update_at(m, step.action, step.label, next))
        updated[mw.memory] += w * choose * p * mw.weight;
    }
    mass = std::move(updated);
  }
  Rational total = 0;
  for (const auto& [m, w] : mass) total += w;
  return total;
}

MarkovChain induced_chain(const LabeledMdp& mdp, const Scheduler& scheduler) {
  MarkovChain chain;
  std::map<ChainState, std::size_t> index;
  auto intern = [&](ChainState s) {
    auto [it, inserted] = index.emplace(s, chain.states.size());
    if (inserted) {
      chain.states.push_back(s);
      chain.edges.emplace_back();
    }
    return it->second;
  };
  chain.initial = intern({scheduler.initial_memory, mdp.initial});
  for (std::size_t i = 0; i < chain.states.size(); ++i) {
    const ChainState cur = chain.states[i];
    // Merge parallel contributions so every (target, action, label) appears once.
    std::map<std::tuple<std::size_t, ActionId, LabelId>, Rational> merged;
    for (const ActionWeight& aw : scheduler.choice_at(mdp, cur.memory, cur.state)) {
      if (aw.weight == 0) continue;
      const Choice* c = mdp.find_choice(cur.state, aw.action);
      if (c == nullptr) throw std::invalid_argument("scheduler chooses a disabled action");
      for (const Outcome& o : c->outcomes)
        for (const MemoryWeight& mw : scheduler.update_at(cur.memory, aw.action, o.label, o.target)) {
          if (mw.weight == 0) continue;
          const std::size_t t = intern({mw.memory, o.target});
          merged[{t, aw.action, o.label}] += aw.weight * o.probability * mw.weight;
        }
    }
    for (auto& [key, p] : merged) chain.edges[i].push_back({std::get<0>(key), p, std::get<1>(key), std::get<2>(key)});
  }
  return chain;
}

std::vector<unsigned> lift_priorities(const MarkovChain& chain, std::span<const unsigned> state_priority) {
  std::vector<unsigned> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) out[i] = state_priority[chain.states[i].state];
  return out;
}

Rational chain_omega_probability(const MarkovChain& chain, std::span<const unsigned> priority) {
  const std::size_t n = chain.size();
  detail::Adjacency graph(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const ChainEdge& e : chain.edges[i])
      if (e.probability > 0) graph[i].push_back(e.target);
  const auto scc = detail::strongly_connected_components(graph);

  // A component is bottom when no edge leaves it.
  std::vector<bool> bottom(scc.count, true);
  std::vector<unsigned> min_priority(scc.count, ~0u);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = scc.component[i];
    min_priority[c] = std::min(min_priority[c], priority[i]);
    for (std::size_t j : graph[i])
      if (scc.component[j] != c) bottom[c] = false;
  }
  std::vector<bool> good(n, false), bad(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = scc.component[i];
    if (!bottom[c]) continue;
    (min_priority[c] % 2 == 0 ? good : bad)[i] = true;
  }
  const auto reaches_good = detail::can_reach(graph, good, std::vector<bool>(n, true));
  if (!reaches_good[chain.initial]) return 0;
  if (good[chain.initial]) return 1;

  // Unknowns: states that can reach a good bottom component but are not in one.
  std::vector<std::size_t> var(n, detail::npos);
  std::vector<std::size_t> vars;
  for (std::size_t i = 0; i < n; ++i)
    if (reaches_good[i] && !good[i]) {
      var[i] = vars.size();
      vars.push_back(i);
    }
  std::vector<std::vector<Rational>> a(vars.size(), std::vector<Rational>(vars.size()));
  std::vector<Rational> b(vars.size());
  for (std::size_t r = 0; r < vars.size(); ++r) {
    const std::size_t i = vars[r];
    a[r][r] += 1;
    for (const ChainEdge& e : chain.edges[i]) {
      if (good[e.target])
        b[r] += e.probability;
      else if (var[e.target] != detail::npos)
        a[r][var[e.target]] -= e.probability;
    }
  }
  const auto x = detail::solve_linear(std::move(a), std::move(b));
  return x[var[chain.initial]];
}

std::vector<unsigned> buchi_priorities(const std::vector<bool>& accepting) {
  std::vector<unsigned> out(accepting.size());
  for (std::size_t i = 0; i < accepting.size(); ++i) out[i] = accepting[i] ? 0 : 1;
  return out;
}

std::vector<unsigned> cobuchi_priorities(const std::vector<bool>& rejecting) {
  std::vector<unsigned> out(rejecting.size());
  for (std::size_t i = 0; i < rejecting.size(); ++i) out[i] = rejecting[i] ? 1 : 2;
  return out;
}

}  // namespace opaq
