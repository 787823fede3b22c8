#include "opaq/solve_pomdp.hpp"

#include "opaq/error.hpp"

#include "graph.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace opaq {

namespace {

std::vector<std::vector<StateId>> class_members(const PartiallyObservableMdp& pomdp) {
  std::vector<std::vector<StateId>> out(pomdp.num_classes());
  for (StateId q = 0; q < pomdp.base.num_states(); ++q) out[pomdp.observation_class[q]].push_back(q);
  return out;
}

}  // namespace

std::string support_name(const LabeledMdp& mdp, const std::vector<StateId>& support) {
  std::string s = "{";
  for (std::size_t i = 0; i < support.size(); ++i) s += (i ? "," : "") + mdp.states[support[i]];
  return s + "}";
}

BeliefSupportMdp belief_support_mdp(const PartiallyObservableMdp& pomdp, const std::vector<bool>& accepting,
                                    std::size_t cap) {
  const LabeledMdp& mdp = pomdp.base;
  BeliefSupportMdp out;
  std::map<std::vector<StateId>, std::size_t> index;
  std::size_t entries = 0;
  auto intern = [&](std::vector<StateId> b) {
    auto [it, inserted] = index.emplace(b, out.supports.size());
    if (inserted) {
      if (out.supports.size() >= cap)
        throw Error(ErrorKind::Resource, "belief support cap of " + std::to_string(cap) + " exceeded");
      entries += b.size();
      if (entries > kMaxSupportEntries)
        throw Error(ErrorKind::Resource,
                    "belief supports hold more than " + std::to_string(kMaxSupportEntries) + " states in total");
      bool any = false, all = true;
      for (StateId q : b) {
        const bool acc = !accepting.empty() && accepting[q];
        any = any || acc;
        all = all && acc;
      }
      out.any_accepting.push_back(any);
      out.all_accepting.push_back(all);
      out.supports.push_back(std::move(b));
      out.successor.emplace_back();
    }
    return it->second;
  };
  out.initial = intern({mdp.initial});
  for (std::size_t i = 0; i < out.supports.size(); ++i) {
    // All states of a support share a class, hence their enabled actions.
    for (const Choice& first : mdp.choices[out.supports[i].front()]) {
      std::map<std::size_t, std::set<StateId>> by_class;
      for (StateId q : out.supports[i])
        for (const Outcome& o : mdp.find_choice(q, first.action)->outcomes)
          if (o.probability > 0) by_class[pomdp.observation_class[o.target]].insert(o.target);
      for (auto& [cls, states] : by_class) {
        const std::size_t t = intern(std::vector<StateId>(states.begin(), states.end()));
        out.successor[i][{first.action, cls}] = t;
      }
    }
  }
  return out;
}

BeliefSupportMdp belief_support_mdp(const ProductPomdp& product, std::size_t cap) {
  return belief_support_mdp(product.pomdp, product.accepting, cap);
}

AlmostSureResult almost_sure_buchi(const PartiallyObservableMdp& pomdp, const std::vector<bool>& accepting,
                                   std::size_t cap) {
  const LabeledMdp& mdp = pomdp.base;
  const BeliefSupportMdp bs = belief_support_mdp(pomdp, accepting, cap);
  const std::size_t nb = bs.supports.size();

  // Pairs (support, true state) with the state inside the support.
  std::vector<std::pair<std::size_t, StateId>> pairs;
  std::vector<std::vector<std::size_t>> pairs_of(nb);
  std::map<std::pair<std::size_t, StateId>, std::size_t> pair_index;
  for (std::size_t b = 0; b < nb; ++b)
    for (StateId q : bs.supports[b]) {
      pair_index[{b, q}] = pairs.size();
      pairs_of[b].push_back(pairs.size());
      pairs.emplace_back(b, q);
    }
  // succ[p][k]: successors of pair p under the k-th enabled action of its state.
  std::vector<std::vector<std::vector<std::size_t>>> succ(pairs.size());
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [b, q] = pairs[p];
    for (const Choice& c : mdp.choices[q]) {
      std::vector<std::size_t> next;
      for (const Outcome& o : c.outcomes) {
        if (o.probability == 0) continue;
        const std::size_t nb2 = bs.successor[b].at({c.action, pomdp.observation_class[o.target]});
        next.push_back(pair_index.at({nb2, o.target}));
      }
      succ[p].push_back(std::move(next));
    }
  }

  std::vector<bool> win(pairs.size(), true);
  std::vector<std::vector<std::size_t>> allow(nb);  // indices into the enabled-action list
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t b = 0; b < nb; ++b) {
      allow[b].clear();
      const bool intact = std::all_of(pairs_of[b].begin(), pairs_of[b].end(), [&](std::size_t p) { return win[p]; });
      if (intact) {
        const std::size_t actions = mdp.choices[bs.supports[b].front()].size();
        for (std::size_t k = 0; k < actions; ++k) {
          const bool safe = std::all_of(pairs_of[b].begin(), pairs_of[b].end(), [&](std::size_t p) {
            return std::all_of(succ[p][k].begin(), succ[p][k].end(), [&](std::size_t t) { return win[t]; });
          });
          if (safe) allow[b].push_back(k);
        }
      }
      if (allow[b].empty())
        for (std::size_t p : pairs_of[b])
          if (win[p]) win[p] = false, changed = true;
    }
    detail::Adjacency g(pairs.size());
    std::vector<bool> goal(pairs.size(), false);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (!win[p]) continue;
      goal[p] = accepting[pairs[p].second];
      for (std::size_t k : allow[pairs[p].first]) g[p].insert(g[p].end(), succ[p][k].begin(), succ[p][k].end());
    }
    const auto reach = detail::can_reach(g, goal, win);
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (win[p] && !reach[p]) win[p] = false, changed = true;
  }

  AlmostSureResult out;
  out.supports = nb;
  out.winning_pairs = static_cast<std::size_t>(std::count(win.begin(), win.end(), true));
  out.yes = win[pair_index.at({bs.initial, mdp.initial})];
  if (!out.yes) return out;

  const auto members = class_members(pomdp);
  Scheduler w;
  w.observation_based = true;
  w.memory_size = nb;
  w.initial_memory = bs.initial;
  for (std::size_t b = 0; b < nb; ++b) w.memory_names.push_back(support_name(mdp, bs.supports[b]));
  for (std::size_t b = 0; b < nb; ++b) {
    if (allow[b].empty()) continue;
    const auto& choices = mdp.choices[bs.supports[b].front()];
    ActionDistribution uniform;
    for (std::size_t k : allow[b]) uniform.push_back({choices[k].action, Rational(1, allow[b].size())});
    for (StateId q : members[pomdp.observation_class[bs.supports[b].front()]]) w.choice[{b, q}] = uniform;
    for (std::size_t k : allow[b])
      for (const auto& [key, target] : bs.successor[b]) {
        if (key.first != choices[k].action) continue;
        for (StateId q : members[key.second]) w.update[{b, key.first, kAnyLabel, q}] = {{target, Rational(1)}};
      }
  }
  const MarkovChain chain = induced_chain(mdp, w);
  const auto prio = lift_priorities(chain, buchi_priorities(accepting));
  out.witness_value = chain_omega_probability(chain, prio);
  if (out.witness_value != 1)
    throw std::logic_error("belief-support witness reaches the objective with probability " + to_string(out.witness_value));
  out.witness = std::move(w);
  return out;
}

AlmostSureResult almost_sure_buchi(const ProductPomdp& product, std::size_t cap) {
  if (product.accepting.empty())
    throw Error(ErrorKind::Unsupported, "almost-sure analysis under partial observation is implemented for Buchi objectives only");
  return almost_sure_buchi(product.pomdp, product.accepting, cap);
}

std::string undecidable_query_message(const std::string& query) {
  return "query '" + query +
         "' is undecidable under partial observation: the value, general disclosure and limit disclosure problems "
         "are undecidable for POMDPs, and almost-sure disclosure is decidable only for deterministic Buchi secrets";
}

PomdpDisclosureSolution almost_sure_disclosure_pomdp(const PartiallyObservableMdp& model, const DetAutomaton& secret,
                                                     const Projection& pi, std::size_t cap) {
  if (secret.kind != AcceptanceKind::Buchi)
    throw Error(ErrorKind::Unsupported,
                "almost-sure disclosure under partial observation is undecidable for co-Buchi and parity secrets; "
                "only deterministic Buchi secrets are supported");
  PomdpDisclosureSolution s;
  s.discl = build_discl_dba(secret, pi, model.base);
  s.product = product(model, s.discl.automaton);
  s.result = almost_sure_buchi(s.product, cap);
  return s;
}

namespace {

constexpr std::size_t kUnset = static_cast<std::size_t>(-1);

class OracleSearch {
 public:
  OracleSearch(const PartiallyObservableMdp& pomdp, std::span<const unsigned> priorities, std::size_t memory,
               std::size_t cap, std::size_t& explored)
      : pomdp_(pomdp), mdp_(pomdp.base), prio_(priorities), memory_(memory), cap_(cap), explored_(explored) {
    classes_ = pomdp.num_classes();
    actions_ = mdp_.actions.size();
    enabled_.resize(classes_);
    for (StateId q = 0; q < mdp_.num_states(); ++q) {
      auto& e = enabled_[pomdp.observation_class[q]];
      if (!e.empty()) continue;
      for (const Choice& c : mdp_.choices[q]) e.push_back(c.action);
    }
    choice_.assign(memory_ * classes_, kUnset);
    update_.assign(memory_ * actions_ * classes_, kUnset);
  }

  std::optional<Scheduler> run() {
    if (search(1)) return build();
    return std::nullopt;
  }

 private:
  std::size_t& choice_at(std::size_t m, std::size_t cls) { return choice_[m * classes_ + cls]; }
  std::size_t& update_at(std::size_t m, ActionId a, std::size_t cls) { return update_[(m * actions_ + a) * classes_ + cls]; }

  struct Frontier {
    std::vector<std::pair<std::size_t, StateId>> nodes;
    std::vector<std::vector<std::size_t>> edges;
    std::vector<bool> resolved;
    // First missing decision: a choice (m, cls) or an update (m, a, cls).
    bool missing_choice = false;
    std::size_t m = 0, cls = 0;
    ActionId action = 0;
    bool complete = true;
  };

  Frontier explore() {
    Frontier f;
    std::map<std::pair<std::size_t, StateId>, std::size_t> index;
    auto intern = [&](std::size_t m, StateId q) {
      auto [it, inserted] = index.emplace(std::make_pair(m, q), f.nodes.size());
      if (inserted) {
        f.nodes.emplace_back(m, q);
        f.edges.emplace_back();
        f.resolved.push_back(true);
      }
      return it->second;
    };
    intern(0, mdp_.initial);
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      const auto [m, q] = f.nodes[i];
      const std::size_t cls = pomdp_.observation_class[q];
      const std::size_t a = choice_at(m, cls);
      if (a == kUnset) {
        f.resolved[i] = false;
        if (f.complete) note_missing(f, true, m, cls, 0);
        continue;
      }
      for (const Outcome& o : mdp_.find_choice(q, a)->outcomes) {
        if (o.probability == 0) continue;
        const std::size_t c2 = pomdp_.observation_class[o.target];
        const std::size_t m2 = update_at(m, a, c2);
        if (m2 == kUnset) {
          f.resolved[i] = false;
          if (f.complete) note_missing(f, false, m, c2, a);
          continue;
        }
        const std::size_t t = intern(m2, o.target);
        f.edges[i].push_back(t);
      }
    }
    return f;
  }

  static void note_missing(Frontier& f, bool is_choice, std::size_t m, std::size_t cls, ActionId a) {
    f.complete = false;
    f.missing_choice = is_choice;
    f.m = m;
    f.cls = cls;
    f.action = a;
  }

  // Some closed, fully decided component has an odd minimum priority.
  bool doomed(const Frontier& f) const {
    const auto scc = detail::strongly_connected_components(f.edges);
    std::vector<bool> closed(scc.count, true);
    std::vector<unsigned> low(scc.count, ~0u);
    for (std::size_t i = 0; i < f.nodes.size(); ++i) {
      const std::size_t c = scc.component[i];
      if (!f.resolved[i]) closed[c] = false;
      low[c] = std::min(low[c], prio_[f.nodes[i].second]);
      for (std::size_t j : f.edges[i])
        if (scc.component[j] != c) closed[c] = false;
    }
    for (std::size_t c = 0; c < scc.count; ++c)
      if (closed[c] && low[c] % 2 == 1) return true;
    return false;
  }

  bool search(std::size_t used) {
    if (++explored_ > cap_) throw Error(ErrorKind::Resource, "scheduler enumeration cap exceeded");
    const Frontier f = explore();
    if (doomed(f)) return false;
    if (f.complete) return true;  // every closed component is even
    if (f.missing_choice) {
      for (ActionId a : enabled_[f.cls]) {
        choice_at(f.m, f.cls) = a;
        if (search(used)) return true;
      }
      choice_at(f.m, f.cls) = kUnset;
      return false;
    }
    const std::size_t limit = std::min(memory_, used + 1);
    for (std::size_t m2 = 0; m2 < limit; ++m2) {
      update_at(f.m, f.action, f.cls) = m2;
      if (search(std::max(used, m2 + 1))) return true;
    }
    update_at(f.m, f.action, f.cls) = kUnset;
    return false;
  }

  Scheduler build() const {
    Scheduler s;
    s.observation_based = true;
    s.memory_size = memory_;
    const auto members = class_members(pomdp_);
    for (std::size_t m = 0; m < memory_; ++m)
      for (std::size_t cls = 0; cls < classes_; ++cls) {
        const std::size_t a = choice_[m * classes_ + cls];
        if (a != kUnset)
          for (StateId q : members[cls]) s.choice[{m, q}] = {{a, Rational(1)}};
        for (ActionId act = 0; act < actions_; ++act) {
          const std::size_t m2 = update_[(m * actions_ + act) * classes_ + cls];
          if (m2 != kUnset)
            for (StateId q : members[cls]) s.update[{m, act, kAnyLabel, q}] = {{m2, Rational(1)}};
        }
      }
    return s;
  }

  const PartiallyObservableMdp& pomdp_;
  const LabeledMdp& mdp_;
  std::span<const unsigned> prio_;
  std::size_t memory_;
  std::size_t cap_;
  std::size_t& explored_;
  std::size_t classes_ = 0;
  std::size_t actions_ = 0;
  std::vector<std::vector<ActionId>> enabled_;
  std::vector<std::size_t> choice_;
  std::vector<std::size_t> update_;
};

}  // namespace

OracleResult enumerate_scheduler_oracle(const PartiallyObservableMdp& pomdp, std::span<const unsigned> priorities,
                                        std::size_t memory_bound, std::size_t cap) {
  if (memory_bound == 0) throw Error(ErrorKind::Validation, "memory bound must be positive");
  OracleResult out;
  for (std::size_t k = 1; k <= memory_bound; ++k) {
    OracleSearch search(pomdp, priorities, k, cap, out.explored);
    if (auto s = search.run()) {
      const MarkovChain chain = induced_chain(pomdp.base, *s);
      if (chain_omega_probability(chain, lift_priorities(chain, priorities)) != 1)
        throw std::logic_error("enumerated scheduler failed the exact check");
      out.yes = true;
      out.memory = k;
      out.witness = std::move(s);
      return out;
    }
  }
  out.memory = memory_bound;
  return out;
}

}  // namespace opaq
