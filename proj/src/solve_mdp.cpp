#include "opaq/solve_mdp.hpp"

#include "opaq/error.hpp"

#include "graph.hpp"
#include "linear.hpp"

#include <algorithm>
#include <stdexcept>

namespace opaq {

namespace {

bool all_successors_in(const Choice& c, const std::vector<bool>& set) {
  return std::all_of(c.outcomes.begin(), c.outcomes.end(),
                     [&](const Outcome& o) { return o.probability == 0 || set[o.target]; });
}

detail::Adjacency full_graph(const LabeledMdp& mdp) {
  detail::Adjacency g(mdp.num_states());
  for (StateId q = 0; q < mdp.num_states(); ++q)
    for (const Choice& c : mdp.choices[q])
      for (const Outcome& o : c.outcomes)
        if (o.probability > 0) g[q].push_back(o.target);
  return g;
}

}  // namespace

std::vector<EndComponent> mec_decomposition(const LabeledMdp& mdp, const std::vector<bool>& alive_in) {
  const std::size_t n = mdp.num_states();
  std::vector<bool> alive = alive_in.empty() ? std::vector<bool>(n, true) : alive_in;
  std::vector<std::vector<const Choice*>> allowed(n);
  for (StateId q = 0; q < n; ++q)
    if (alive[q])
      for (const Choice& c : mdp.choices[q])
        if (all_successors_in(c, alive)) allowed[q].push_back(&c);

  detail::SccResult scc;
  for (bool changed = true; changed;) {
    changed = false;
    for (StateId q = 0; q < n; ++q)
      if (alive[q] && allowed[q].empty()) alive[q] = false;
    detail::Adjacency g(n);
    for (StateId q = 0; q < n; ++q)
      if (alive[q])
        for (const Choice* c : allowed[q])
          for (const Outcome& o : c->outcomes)
            if (o.probability > 0) g[q].push_back(o.target);
    scc = detail::strongly_connected_components(g, alive);
    for (StateId q = 0; q < n; ++q) {
      if (!alive[q]) continue;
      auto& acts = allowed[q];
      const auto keep_end = std::remove_if(acts.begin(), acts.end(), [&](const Choice* c) {
        return std::any_of(c->outcomes.begin(), c->outcomes.end(), [&](const Outcome& o) {
          return o.probability > 0 && (!alive[o.target] || scc.component[o.target] != scc.component[q]);
        });
      });
      if (keep_end != acts.end()) {
        acts.erase(keep_end, acts.end());
        changed = true;
      }
      if (acts.empty()) {
        alive[q] = false;
        changed = true;
      }
    }
  }

  std::map<std::size_t, std::size_t> slot;
  std::vector<EndComponent> out;
  for (StateId q = 0; q < n; ++q) {
    if (!alive[q]) continue;
    auto [it, inserted] = slot.emplace(scc.component[q], out.size());
    if (inserted) out.emplace_back();
    EndComponent& ec = out[it->second];
    ec.states.push_back(q);
    for (const Choice* c : allowed[q]) ec.actions[q].push_back(c->action);
  }
  return out;
}

namespace {

void collect_even(const LabeledMdp& mdp, std::span<const unsigned> priorities, const EndComponent& ec,
                  std::vector<EndComponent>& out) {
  unsigned lowest = ~0u;
  for (StateId q : ec.states) lowest = std::min(lowest, priorities[q]);
  if (lowest % 2 == 0) {
    out.push_back(ec);
    return;
  }
  std::vector<bool> alive(mdp.num_states(), false);
  for (StateId q : ec.states) alive[q] = priorities[q] != lowest;
  for (const EndComponent& sub : mec_decomposition(mdp, alive)) collect_even(mdp, priorities, sub, out);
}

}  // namespace

EvenEndComponents even_end_components(const LabeledMdp& mdp, std::span<const unsigned> priorities) {
  EvenEndComponents out;
  out.states.assign(mdp.num_states(), false);
  for (const EndComponent& mec : mec_decomposition(mdp)) collect_even(mdp, priorities, mec, out.witnesses);
  for (const EndComponent& ec : out.witnesses)
    for (StateId q : ec.states) out.states[q] = true;
  return out;
}

std::vector<bool> even_ec_states(const LabeledMdp& mdp, std::span<const unsigned> priorities) {
  return even_end_components(mdp, priorities).states;
}

ReachabilityResult max_reachability(const LabeledMdp& mdp, const std::vector<bool>& target) {
  const std::size_t n = mdp.num_states();
  const std::vector<bool> everything(n, true);
  const auto positive = detail::can_reach(full_graph(mdp), target, everything);

  ReachabilityResult out;
  out.value.assign(n, Rational(0));
  out.strategy.assign(n, 0);
  for (StateId q = 0; q < n; ++q)
    if (!mdp.choices[q].empty()) out.strategy[q] = mdp.choices[q].front().action;

  // States that reach the target almost surely under some strategy.
  std::vector<bool> sure = positive;
  while (true) {
    detail::Adjacency g(n);
    for (StateId q = 0; q < n; ++q)
      if (sure[q] && !target[q])
        for (const Choice& c : mdp.choices[q])
          if (all_successors_in(c, sure))
            for (const Outcome& o : c.outcomes)
              if (o.probability > 0) g[q].push_back(o.target);
    auto next = detail::can_reach(g, target, sure);
    if (next == sure) break;
    sure = std::move(next);
  }
  std::vector<bool> attracted = target;
  for (bool grew = true; grew;) {
    grew = false;
    for (StateId q = 0; q < n; ++q) {
      if (!sure[q] || attracted[q]) continue;
      for (const Choice& c : mdp.choices[q]) {
        if (!all_successors_in(c, sure)) continue;
        const bool closer = std::any_of(c.outcomes.begin(), c.outcomes.end(),
                                        [&](const Outcome& o) { return o.probability > 0 && attracted[o.target]; });
        if (closer) {
          out.strategy[q] = c.action;
          attracted[q] = grew = true;
          break;
        }
      }
    }
  }
  for (StateId q = 0; q < n; ++q)
    if (sure[q]) out.value[q] = 1;

  std::vector<StateId> maybe;
  for (StateId q = 0; q < n; ++q)
    if (positive[q] && !sure[q]) maybe.push_back(q);
  if (maybe.empty()) return out;

  // Policy iteration over the remaining states, switching only on strict improvement.
  auto expected = [&](const Choice& c) {
    Rational v = 0;
    for (const Outcome& o : c.outcomes) v += o.probability * out.value[o.target];
    return v;
  };
  while (true) {
    detail::Adjacency g(n);
    for (StateId q : maybe)
      for (const Outcome& o : mdp.find_choice(q, out.strategy[q])->outcomes)
        if (o.probability > 0) g[q].push_back(o.target);
    const auto reaches = detail::can_reach(g, sure, everything);
    std::vector<std::size_t> var(n, detail::npos);
    std::vector<StateId> vars;
    for (StateId q : maybe) {
      out.value[q] = 0;
      if (reaches[q]) {
        var[q] = vars.size();
        vars.push_back(q);
      }
    }
    std::vector<std::vector<Rational>> a(vars.size(), std::vector<Rational>(vars.size()));
    std::vector<Rational> b(vars.size());
    for (std::size_t r = 0; r < vars.size(); ++r) {
      a[r][r] += 1;
      for (const Outcome& o : mdp.find_choice(vars[r], out.strategy[vars[r]])->outcomes) {
        if (sure[o.target])
          b[r] += o.probability;
        else if (var[o.target] != detail::npos)
          a[r][var[o.target]] -= o.probability;
      }
    }
    const auto x = detail::solve_linear(std::move(a), std::move(b));
    for (std::size_t r = 0; r < vars.size(); ++r) out.value[vars[r]] = x[r];

    bool switched = false;
    for (StateId q : maybe) {
      Rational best = expected(*mdp.find_choice(q, out.strategy[q]));
      for (const Choice& c : mdp.choices[q]) {
        const Rational v = expected(c);
        if (v > best) {
          best = v;
          out.strategy[q] = c.action;
          switched = true;
        }
      }
    }
    if (!switched) break;
  }
  return out;
}

ValueCertificate max_parity_probability(const LabeledMdp& mdp, std::span<const unsigned> priorities) {
  const EvenEndComponents even = even_end_components(mdp, priorities);
  const ReachabilityResult reach = max_reachability(mdp, even.states);
  std::vector<ActionId> action_of = reach.strategy;

  // Inside each witness component, move towards its minimum-priority state.
  for (const EndComponent& ec : even.witnesses) {
    StateId anchor = ec.states.front();
    for (StateId q : ec.states)
      if (priorities[q] < priorities[anchor]) anchor = q;
    std::vector<bool> done(mdp.num_states(), false);
    done[anchor] = true;
    action_of[anchor] = ec.actions.at(anchor).front();
    for (bool grew = true; grew;) {
      grew = false;
      for (StateId q : ec.states) {
        if (done[q]) continue;
        for (ActionId a : ec.actions.at(q)) {
          const auto& outs = mdp.find_choice(q, a)->outcomes;
          if (std::any_of(outs.begin(), outs.end(), [&](const Outcome& o) { return o.probability > 0 && done[o.target]; })) {
            action_of[q] = a;
            done[q] = grew = true;
            break;
          }
        }
      }
    }
  }

  ValueCertificate cert;
  cert.value = reach.value[mdp.initial];
  cert.scheduler = Scheduler::memoryless(action_of);
  const MarkovChain chain = induced_chain(mdp, cert.scheduler);
  const auto lifted = lift_priorities(chain, priorities);
  cert.witness_chain_value = chain_omega_probability(chain, lifted);
  if (cert.witness_chain_value != cert.value)
    throw std::logic_error("parity certificate mismatch: " + to_string(cert.value) + " vs " +
                           to_string(cert.witness_chain_value));
  return cert;
}

IntervalResult interval_parity_probability(const LabeledMdp& mdp, std::span<const unsigned> priorities,
                                           double tolerance, std::size_t max_iterations) {
  const std::size_t n = mdp.num_states();
  const std::vector<bool> target = even_ec_states(mdp, priorities);
  const auto positive = detail::can_reach(full_graph(mdp), target, std::vector<bool>(n, true));
  std::vector<bool> maybe(n);
  std::vector<double> lo(n, 0.0), hi(n, 0.0);
  for (StateId q = 0; q < n; ++q) {
    maybe[q] = positive[q] && !target[q];
    if (target[q]) lo[q] = hi[q] = 1.0;
    if (maybe[q]) hi[q] = 1.0;
  }
  auto to_double = [](const Rational& r) { return r.get_d(); };
  const auto mecs = mec_decomposition(mdp, maybe);
  auto value_of = [&](const Choice& c, const std::vector<double>& v) {
    double s = 0;
    for (const Outcome& o : c.outcomes) s += to_double(o.probability) * v[o.target];
    return s;
  };

  IntervalResult r;
  while (r.iterations < max_iterations) {
    if (hi[mdp.initial] - lo[mdp.initial] <= tolerance) break;
    ++r.iterations;
    std::vector<double> nlo = lo, nhi = hi;
    for (StateId q = 0; q < n; ++q) {
      if (!maybe[q]) continue;
      double bl = 0, bh = 0;
      for (const Choice& c : mdp.choices[q]) {
        bl = std::max(bl, value_of(c, lo));
        bh = std::max(bh, value_of(c, hi));
      }
      nlo[q] = bl;
      nhi[q] = bh;
    }
    // Deflate: an end component cannot be worth more than its best exit.
    for (const EndComponent& ec : mecs) {
      double exit = 0;
      for (StateId q : ec.states) {
        const auto& inside = ec.actions.at(q);
        for (const Choice& c : mdp.choices[q])
          if (std::find(inside.begin(), inside.end(), c.action) == inside.end()) exit = std::max(exit, value_of(c, nhi));
      }
      for (StateId q : ec.states) nhi[q] = std::min(nhi[q], exit);
    }
    lo = std::move(nlo);
    hi = std::move(nhi);
  }
  r.lower = lo[mdp.initial];
  r.upper = hi[mdp.initial];
  return r;
}

DisclosureSolution disclosure_value(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi) {
  DisclosureSolution s;
  s.discl = build_discl(secret, pi, model);
  s.product = product(model, s.discl.automaton);
  s.certificate = max_parity_probability(s.product.mdp(), s.product.priority);
  return s;
}

std::string to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::Value: return "value";
    case QueryKind::Threshold: return "threshold";
    case QueryKind::AlmostSureOpacity: return "almost-sure-opacity";
    case QueryKind::LimitDisclosure: return "limit-disclosure";
    case QueryKind::AlmostSureDisclosure: return "almost-sure-disclosure";
  }
  return "?";
}

Verdict decide(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi, const Query& query) {
  if (query.kind == QueryKind::Threshold && (query.delta < 0 || query.delta > 1))
    throw Error(ErrorKind::Validation, "threshold must lie in [0, 1]");
  Verdict v;
  v.query = query;
  v.solution = disclosure_value(model, secret, pi);
  v.value = v.solution.certificate.value;
  switch (query.kind) {
    case QueryKind::Value: break;
    case QueryKind::Threshold: v.holds = v.value > query.delta; break;
    case QueryKind::AlmostSureOpacity: v.holds = v.value == 0; break;
    case QueryKind::LimitDisclosure: v.holds = v.value == 1; break;
    case QueryKind::AlmostSureDisclosure: v.holds = v.value == 1 && v.solution.certificate.witness_chain_value == 1; break;
  }
  return v;
}

SymmetricVerdict decide_symmetric(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi) {
  SymmetricVerdict out;
  out.secret = decide(model, secret, pi, {QueryKind::AlmostSureOpacity, 0});
  out.complement = decide(model, dualize(complete(secret)), pi, {QueryKind::AlmostSureOpacity, 0});
  out.holds = *out.secret.holds && *out.complement.holds;
  return out;
}

}  // namespace opaq
