#include "support.hpp"

#include "opaq/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <functional>
#include <map>
#include <set>

namespace opaq::testing {

std::uint64_t base_seed() {
  if (const char* s = std::getenv("OPAQ_SEED")) return std::strtoull(s, nullptr, 10);
  return 20240607;
}

Rng make_rng(std::uint64_t salt) { return Rng(base_seed() * 1000003 + salt); }

std::string fixture(const std::string& name) { return std::string(OPAQ_FIXTURES) + "/" + name; }

namespace {

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

std::vector<std::string> letter_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('a' + i)));
  return out;
}

unsigned random_mark(Rng& rng, AcceptanceKind kind) {
  return kind == AcceptanceKind::Parity ? static_cast<unsigned>(pick(rng, 4)) : static_cast<unsigned>(pick(rng, 2));
}

bool reaches(const std::vector<std::vector<std::pair<std::size_t, unsigned>>>& edges, std::size_t from, std::size_t to,
             unsigned min_priority) {
  std::vector<bool> seen(edges.size(), false);
  std::deque<std::size_t> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (u == to) return true;
    for (const auto& [v, p] : edges[u])
      if (p >= min_priority && !seen[v]) {
        seen[v] = true;
        queue.push_back(v);
      }
  }
  return false;
}

}  // namespace

bool PriorityGraph::has_cycle_with_min_parity(std::size_t from, unsigned parity) const {
  std::vector<bool> reachable(edges.size(), false);
  std::deque<std::size_t> queue{from};
  reachable[from] = true;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (const auto& [v, p] : edges[u])
      if (!reachable[v]) {
        reachable[v] = true;
        queue.push_back(v);
      }
  }
  for (std::size_t u = 0; u < edges.size(); ++u) {
    if (!reachable[u]) continue;
    for (const auto& [v, p] : edges[u])
      if (p % 2 == parity && reaches(edges, v, u, p)) return true;
  }
  return false;
}

DetAutomaton random_det(Rng& rng, std::size_t states, std::size_t letters, AcceptanceKind kind) {
  DetAutomaton a = DetAutomaton::with_states(letter_names(letters), states, kind);
  a.initial = 0;
  for (AutState s = 0; s < states; ++s) {
    a.acceptance[s] = random_mark(rng, kind);
    for (Letter x = 0; x < letters; ++x) a.next(s, x) = pick(rng, states);
  }
  return a;
}

NondetAutomaton random_nondet(Rng& rng, std::size_t states, std::size_t letters, AcceptanceKind kind) {
  NondetAutomaton a;
  a.alphabet = letter_names(letters);
  a.kind = kind;
  a.edges.resize(states);
  for (AutState s = 0; s < states; ++s) {
    for (Letter x = 0; x < letters; ++x) {
      const std::size_t fanout = pick(rng, 3);
      for (std::size_t k = 0; k < fanout; ++k) a.edges[s].push_back({x, pick(rng, states), random_mark(rng, kind)});
    }
    std::sort(a.edges[s].begin(), a.edges[s].end());
    a.edges[s].erase(std::unique(a.edges[s].begin(), a.edges[s].end()), a.edges[s].end());
  }
  return a;
}

std::vector<LassoWord> all_lassos(std::size_t letters, std::size_t max_stem, std::size_t max_cycle) {
  std::vector<std::vector<Letter>> words[8];
  words[0] = {{}};
  const std::size_t longest = std::max(max_stem, max_cycle);
  for (std::size_t len = 1; len <= longest; ++len)
    for (const auto& w : words[len - 1])
      for (Letter x = 0; x < letters; ++x) {
        auto v = w;
        v.push_back(x);
        words[len].push_back(std::move(v));
      }
  std::vector<LassoWord> out;
  for (std::size_t s = 0; s <= max_stem; ++s)
    for (std::size_t c = 1; c <= max_cycle; ++c)
      for (const auto& stem : words[s])
        for (const auto& cycle : words[c]) out.push_back({stem, cycle});
  return out;
}

bool nondet_accepts(const NondetAutomaton& a, const LassoWord& w) {
  const std::size_t len = w.stem.size() + w.cycle.size();
  auto letter_at = [&](std::size_t pos) { return pos < w.stem.size() ? w.stem[pos] : w.cycle[pos - w.stem.size()]; };
  auto next_pos = [&](std::size_t pos) { return pos + 1 < len ? pos + 1 : w.stem.size(); };
  auto priority = [&](unsigned mark) -> unsigned {
    switch (a.kind) {
      case AcceptanceKind::Buchi: return mark ? 0 : 1;
      case AcceptanceKind::CoBuchi: return mark ? 1 : 2;
      case AcceptanceKind::Parity: return mark;
    }
    return 1;
  };
  PriorityGraph g;
  g.edges.resize(a.num_states() * len);
  for (AutState s = 0; s < a.num_states(); ++s)
    for (std::size_t pos = 0; pos < len; ++pos)
      for (const NondetEdge& e : a.edges[s]) {
        if (e.letter == kEpsilon) throw std::logic_error("nondet_accepts expects an epsilon-free automaton");
        if (e.letter == letter_at(pos)) g.edges[s * len + pos].push_back({e.target * len + next_pos(pos), priority(e.mark)});
      }
  return g.has_cycle_with_min_parity(a.initial * len, 0);
}

LabeledMdp random_mdp(Rng& rng, std::size_t states, std::size_t actions, std::size_t labels) {
  PartiallyObservableMdp p = random_pomdp(rng, states, actions, labels, states);
  return p.base;
}

LabeledMdp with_target_labels(Rng& rng, LabeledMdp mdp) {
  for (auto& choices : mdp.choices)
    for (Choice& c : choices) {
      std::map<StateId, Rational> merged;
      for (const Outcome& o : c.outcomes) merged[o.target] += o.probability;
      c.outcomes.clear();
      for (const auto& [target, p] : merged) c.outcomes.push_back({pick(rng, mdp.labels.size()), target, p});
    }
  return mdp;
}

PartiallyObservableMdp random_pomdp(Rng& rng, std::size_t states, std::size_t actions, std::size_t labels,
                                    std::size_t classes, bool all_actions) {
  static const std::vector<std::vector<Rational>> splits = {
      {Rational(1)}, {Rational(1, 2), Rational(1, 2)}, {Rational(1, 3), Rational(2, 3)}, {Rational(1, 4), Rational(3, 4)},
      {Rational(1, 3), Rational(1, 3), Rational(1, 3)}, {Rational(1, 2), Rational(1, 4), Rational(1, 4)}};
  PartiallyObservableMdp p;
  LabeledMdp& m = p.base;
  for (std::size_t i = 0; i < states; ++i) m.states.push_back("s" + std::to_string(i));
  for (std::size_t i = 0; i < actions; ++i) m.actions.push_back("act" + std::to_string(i));
  for (std::size_t i = 0; i < labels; ++i) m.labels.push_back("l" + std::to_string(i));
  m.initial = 0;
  p.observation_class.resize(states);
  for (StateId q = 0; q < states; ++q) p.observation_class[q] = pick(rng, classes);
  std::map<std::size_t, std::size_t> dense;
  for (std::size_t& c : p.observation_class) c = dense.emplace(c, dense.size()).first->second;

  std::vector<std::vector<ActionId>> enabled(dense.size());
  for (auto& e : enabled) {
    for (ActionId a = 0; a < actions; ++a)
      if (all_actions || pick(rng, 2)) e.push_back(a);
    if (e.empty()) e.push_back(pick(rng, actions));
  }
  m.choices.resize(states);
  for (StateId q = 0; q < states; ++q)
    for (ActionId a : enabled[p.observation_class[q]]) {
      Choice c{a, {}};
      const auto& split = splits[pick(rng, splits.size())];
      std::set<std::pair<LabelId, StateId>> used;
      for (const Rational& prob : split) {
        std::pair<LabelId, StateId> key;
        do key = {pick(rng, labels), pick(rng, states)};
        while (used.count(key) && used.size() < labels * states);
        if (used.count(key)) {
          for (Outcome& o : c.outcomes)
            if (o.label == key.first && o.target == key.second) o.probability += prob;
          continue;
        }
        used.insert(key);
        c.outcomes.push_back({key.first, key.second, prob});
      }
      m.choices[q].push_back(std::move(c));
    }
  return p;
}

Projection random_projection(Rng& rng, const LabeledMdp& mdp) {
  const RunAlphabet run = run_alphabet(mdp);
  for (;;) {
    Projection pi;
    pi.observables = {"x", "y"};
    for (StateId q = 0; q < mdp.num_states(); ++q) {
      const std::size_t r = pick(rng, 4);
      pi.state_obs.push_back(r < 2 ? kErased : r - 2);
    }
    for (const auto& [step, x] : run.step_symbol) {
      const std::size_t r = pick(rng, 3);
      if (r > 0) pi.step_obs[step] = r - 1;
    }
    if (check_observation_divergence(mdp, pi).divergent) return pi;
  }
}

std::vector<LassoRun> model_lassos(const LabeledMdp& mdp, std::size_t max_stem, std::size_t max_cycle,
                                   std::size_t cap) {
  std::vector<LassoRun> out;
  FiniteRun run;
  run.states = {mdp.initial};
  std::function<void()> extend = [&]() {
    if (out.size() >= cap) return;
    const std::size_t len = run.length();
    for (std::size_t s = 0; s < len && s <= max_stem; ++s) {
      if (len - s > max_cycle || run.states[s] != run.last()) continue;
      LassoRun l;
      l.stem.states.assign(run.states.begin(), run.states.begin() + s + 1);
      l.stem.steps.assign(run.steps.begin(), run.steps.begin() + s);
      l.cycle.states.assign(run.states.begin() + s, run.states.end());
      l.cycle.steps.assign(run.steps.begin() + s, run.steps.end());
      out.push_back(std::move(l));
    }
    if (len == max_stem + max_cycle) return;
    for (const Choice& c : mdp.choices[run.last()])
      for (const Outcome& o : c.outcomes) {
        run.states.push_back(o.target);
        run.steps.push_back({c.action, o.label});
        extend();
        run.states.pop_back();
        run.steps.pop_back();
      }
  };
  extend();
  return out;
}

bool brute_observation_run(const LabeledMdp& mdp, const DetAutomaton& a, const Projection& pi, const LassoWord& w,
                           unsigned parity) {
  if (w.cycle.empty()) throw std::logic_error("brute_observation_run needs an infinite observation");
  const RunAlphabet alphabet = run_alphabet(mdp);
  const std::size_t len = w.stem.size() + w.cycle.size();
  auto letter_at = [&](std::size_t k) { return k < w.stem.size() ? w.stem[k] : w.cycle[k - w.stem.size()]; };
  auto advance = [&](std::size_t k) { return k + 1 < len ? k + 1 : w.stem.size(); };
  const std::vector<unsigned> prio = state_priorities(a);
  const std::size_t ns = a.num_states();
  auto node = [&](StateId q, AutState s, std::size_t k) { return (q * ns + s) * len + k; };

  // Nodes (q, s, k): about to read q with the automaton in s at position k
  // of w. An edge reads one state symbol and one step; its priority is the
  // least automaton priority visited on the way.
  PriorityGraph g;
  g.edges.resize(mdp.num_states() * ns * len);
  for (StateId q = 0; q < mdp.num_states(); ++q)
    for (AutState s = 0; s < ns; ++s)
      for (std::size_t k = 0; k < len; ++k) {
        const AutState s1 = a.next(s, alphabet.state_symbol[q]);
        if (s1 == kNoState) continue;
        std::size_t k1 = k;
        if (const ObsId o = pi.of_state(q); o != kErased) {
          if (letter_at(k) != o) continue;
          k1 = advance(k);
        }
        for (const Choice& c : mdp.choices[q])
          for (const Outcome& out : c.outcomes) {
            const AutState s2 = a.next(s1, alphabet.step(c.action, out.label));
            if (s2 == kNoState) continue;
            std::size_t k2 = k1;
            if (const ObsId o = pi.of_step(c.action, out.label); o != kErased) {
              if (letter_at(k1) != o) continue;
              k2 = advance(k1);
            }
            g.edges[node(q, s, k)].push_back({node(out.target, s2, k2), std::min(prio[s1], prio[s2])});
          }
      }
  return g.has_cycle_with_min_parity(node(mdp.initial, a.initial, 0), parity);
}

bool brute_disclosed(const LabeledMdp& mdp, const DetAutomaton& secret, const Projection& pi, const LassoRun& run) {
  if (!accepts_lasso(secret, lasso_word(run_alphabet(mdp), run))) return false;
  return !brute_observation_run(mdp, secret, pi, observe(pi, run), 1);
}

std::optional<Rational> brute_max_parity(const LabeledMdp& mdp, std::span<const unsigned> priorities, std::size_t cap) {
  std::size_t count = 1;
  for (const auto& cs : mdp.choices) {
    count *= std::max<std::size_t>(1, cs.size());
    if (count > cap) return std::nullopt;
  }
  std::vector<std::size_t> index(mdp.num_states(), 0);
  std::optional<Rational> best;
  for (;;) {
    std::vector<ActionId> action_of(mdp.num_states());
    for (StateId q = 0; q < mdp.num_states(); ++q) action_of[q] = mdp.choices[q][index[q]].action;
    const MarkovChain chain = induced_chain(mdp, Scheduler::memoryless(action_of));
    const Rational v = chain_omega_probability(chain, lift_priorities(chain, priorities));
    if (!best || v > *best) best = v;
    StateId q = 0;
    while (q < mdp.num_states() && ++index[q] == mdp.choices[q].size()) index[q++] = 0;
    if (q == mdp.num_states()) break;
  }
  return best;
}

}  // namespace opaq::testing
