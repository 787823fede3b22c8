#include "opaq/automata.hpp"

#include "opaq/error.hpp"

#include "graph.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace opaq {

std::string to_string(AcceptanceKind kind) {
  switch (kind) {
    case AcceptanceKind::Buchi: return "Buchi";
    case AcceptanceKind::CoBuchi: return "co-Buchi";
    case AcceptanceKind::Parity: return "parity";
  }
  return "?";
}

std::string state_symbol_name(const std::string& state) { return "state:" + state; }
std::string step_symbol_name(const std::string& action, const std::string& label) {
  return "step:" + action + "," + label;
}

RunAlphabet run_alphabet(const LabeledMdp& mdp) {
  RunAlphabet out;
  for (StateId q = 0; q < mdp.num_states(); ++q) {
    out.state_symbol.push_back(out.symbols.size());
    out.symbols.push_back(state_symbol_name(mdp.states[q]));
  }
  std::set<std::pair<ActionId, LabelId>> steps;
  for (const auto& cs : mdp.choices)
    for (const Choice& c : cs)
      for (const Outcome& o : c.outcomes) steps.insert({c.action, o.label});
  for (const auto& [a, l] : steps) {
    out.step_symbol[{a, l}] = out.symbols.size();
    out.symbols.push_back(step_symbol_name(mdp.actions[a], mdp.labels[l]));
  }
  return out;
}

std::vector<Letter> run_word(const RunAlphabet& alphabet, const FiniteRun& run) {
  std::vector<Letter> w;
  w.push_back(alphabet.state_symbol[run.states.front()]);
  for (std::size_t i = 0; i < run.steps.size(); ++i) {
    w.push_back(alphabet.step(run.steps[i].action, run.steps[i].label));
    w.push_back(alphabet.state_symbol[run.states[i + 1]]);
  }
  return w;
}

LassoWord lasso_word(const RunAlphabet& alphabet, const LassoRun& lasso) {
  LassoWord w;
  w.stem = run_word(alphabet, lasso.stem);
  auto cyc = run_word(alphabet, lasso.cycle);
  w.cycle.assign(cyc.begin() + 1, cyc.end());
  return w;
}

bool DetAutomaton::is_complete() const {
  return std::none_of(delta.begin(), delta.end(), [](AutState s) { return s == kNoState; });
}

AutState DetAutomaton::add_state(unsigned acc) {
  acceptance.push_back(acc);
  delta.resize(delta.size() + alphabet.size(), kNoState);
  return acceptance.size() - 1;
}

DetAutomaton DetAutomaton::with_states(std::vector<std::string> alphabet, std::size_t states, AcceptanceKind kind) {
  DetAutomaton a;
  a.alphabet = std::move(alphabet);
  a.kind = kind;
  a.acceptance.assign(states, 0);
  a.delta.assign(states * a.alphabet.size(), kNoState);
  return a;
}

std::vector<unsigned> state_priorities(const DetAutomaton& a) {
  switch (a.kind) {
    case AcceptanceKind::Parity: return a.acceptance;
    case AcceptanceKind::Buchi: {
      std::vector<bool> f(a.num_states());
      for (std::size_t s = 0; s < f.size(); ++s) f[s] = a.acceptance[s] != 0;
      return buchi_priorities(f);
    }
    case AcceptanceKind::CoBuchi: {
      std::vector<bool> f(a.num_states());
      for (std::size_t s = 0; s < f.size(); ++s) f[s] = a.acceptance[s] != 0;
      return cobuchi_priorities(f);
    }
  }
  return {};
}

bool NondetAutomaton::has_epsilon() const {
  for (const auto& out : edges)
    for (const NondetEdge& e : out)
      if (e.letter == kEpsilon) return true;
  return false;
}

namespace {

bool accepting_loop(AcceptanceKind kind, const std::vector<unsigned>& acc, const std::vector<AutState>& loop) {
  switch (kind) {
    case AcceptanceKind::Buchi:
      return std::any_of(loop.begin(), loop.end(), [&](AutState s) { return acc[s] != 0; });
    case AcceptanceKind::CoBuchi:
      return std::none_of(loop.begin(), loop.end(), [&](AutState s) { return acc[s] != 0; });
    case AcceptanceKind::Parity: {
      unsigned m = ~0u;
      for (AutState s : loop) m = std::min(m, acc[s]);
      return m % 2 == 0;
    }
  }
  return false;
}

void check_letter(const DetAutomaton& a, Letter x) {
  if (x >= a.num_letters()) throw Error(ErrorKind::Validation, "symbol outside the automaton alphabet");
}

unsigned largest_odd_at_least(unsigned p) { return p % 2 == 1 ? p : p + 1; }

}  // namespace

bool accepts_lasso(const DetAutomaton& a, const LassoWord& w) {
  if (w.cycle.empty()) throw Error(ErrorKind::Validation, "lasso cycle must be nonempty");
  AutState s = a.initial;
  for (Letter x : w.stem) {
    check_letter(a, x);
    s = a.next(s, x);
    if (s == kNoState) return false;
  }
  for (Letter x : w.cycle) check_letter(a, x);
  const std::size_t len = w.cycle.size();
  // first_seen[(state, position)] = index into trace
  std::map<std::pair<AutState, std::size_t>, std::size_t> first_seen;
  std::vector<AutState> trace;
  std::size_t pos = 0;
  while (true) {
    auto [it, inserted] = first_seen.emplace(std::make_pair(s, pos), trace.size());
    if (!inserted) {
      std::vector<AutState> loop(trace.begin() + static_cast<std::ptrdiff_t>(it->second), trace.end());
      return accepting_loop(a.kind, a.acceptance, loop);
    }
    trace.push_back(s);
    s = a.next(s, w.cycle[pos]);
    if (s == kNoState) return false;
    pos = (pos + 1) % len;
  }
}

DetAutomaton complete(DetAutomaton a) {
  if (a.is_complete()) return a;
  unsigned sink_acc = 0;
  switch (a.kind) {
    case AcceptanceKind::Buchi: sink_acc = 0; break;
    case AcceptanceKind::CoBuchi: sink_acc = 1; break;
    case AcceptanceKind::Parity: {
      unsigned top = 1;
      for (unsigned p : a.acceptance) top = std::max(top, p);
      sink_acc = largest_odd_at_least(top);
      break;
    }
  }
  const AutState sink = a.add_state(sink_acc);
  for (AutState& t : a.delta)
    if (t == kNoState) t = sink;
  return a;
}

DetAutomaton dualize(const DetAutomaton& a) {
  if (!a.is_complete()) throw Error(ErrorKind::Validation, "dualize requires a complete automaton");
  DetAutomaton d = a;
  switch (a.kind) {
    case AcceptanceKind::Buchi: d.kind = AcceptanceKind::CoBuchi; break;
    case AcceptanceKind::CoBuchi: d.kind = AcceptanceKind::Buchi; break;
    case AcceptanceKind::Parity:
      for (unsigned& p : d.acceptance) ++p;
      break;
  }
  return d;
}

DetAutomaton intersect_dba(const DetAutomaton& a, const DetAutomaton& b) {
  if (a.alphabet != b.alphabet) throw Error(ErrorKind::Validation, "intersect_dba: alphabet mismatch");
  if (a.kind != AcceptanceKind::Buchi || b.kind != AcceptanceKind::Buchi)
    throw Error(ErrorKind::Validation, "intersect_dba expects Buchi automata");
  if (!a.is_complete() || !b.is_complete()) throw Error(ErrorKind::Validation, "intersect_dba expects complete automata");
  using Key = std::tuple<AutState, AutState, int>;
  DetAutomaton r = DetAutomaton::with_states(a.alphabet, 0, AcceptanceKind::Buchi);
  std::map<Key, AutState> index;
  std::vector<Key> order;
  auto intern = [&](Key k) {
    auto [it, inserted] = index.emplace(k, order.size());
    if (inserted) {
      order.push_back(k);
      const auto [p, q, phase] = k;
      r.add_state(phase == 1 && b.acceptance[q] != 0 ? 1 : 0);
    }
    return it->second;
  };
  r.initial = intern({a.initial, b.initial, 0});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [p, q, phase] = order[i];
    int next_phase = phase;
    if (phase == 0 && a.acceptance[p] != 0) next_phase = 1;
    if (phase == 1 && b.acceptance[q] != 0) next_phase = 0;
    for (Letter x = 0; x < a.num_letters(); ++x) {
      const AutState t = intern({a.next(p, x), b.next(q, x), next_phase});
      r.next(i, x) = t;
    }
  }
  return r;
}

NondetAutomaton to_nondet(const DetAutomaton& a) {
  NondetAutomaton n;
  n.alphabet = a.alphabet;
  n.kind = a.kind;
  n.initial = a.initial;
  n.edges.resize(a.num_states());
  for (AutState s = 0; s < a.num_states(); ++s)
    for (Letter x = 0; x < a.num_letters(); ++x)
      if (const AutState t = a.next(s, x); t != kNoState) n.edges[s].push_back({x, t, a.acceptance[s]});
  return n;
}

namespace {

constexpr unsigned kNoMark = ~0u;

// Identity element and combination for marks along a path.
unsigned neutral_mark(AcceptanceKind kind) { return kind == AcceptanceKind::Parity ? kNoMark : 0; }
unsigned combine_marks(AcceptanceKind kind, unsigned m1, unsigned m2) {
  return kind == AcceptanceKind::Parity ? std::min(m1, m2) : (m1 | m2);
}

NondetAutomaton trim_nondet(const NondetAutomaton& a) {
  std::vector<AutState> renum(a.num_states(), kNoState);
  std::vector<AutState> order{a.initial};
  renum[a.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const NondetEdge& e : a.edges[order[i]])
      if (renum[e.target] == kNoState) {
        renum[e.target] = order.size();
        order.push_back(e.target);
      }
  NondetAutomaton r;
  r.alphabet = a.alphabet;
  r.kind = a.kind;
  r.initial = 0;
  r.edges.resize(order.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    for (const NondetEdge& e : a.edges[order[i]]) r.edges[i].push_back({e.letter, renum[e.target], e.mark});
  return r;
}

// Edge priorities under min-even semantics for any transition-based acceptance.
unsigned edge_priority(AcceptanceKind kind, unsigned mark) {
  switch (kind) {
    case AcceptanceKind::Buchi: return mark != 0 ? 0 : 1;
    case AcceptanceKind::CoBuchi: return mark != 0 ? 1 : 2;
    case AcceptanceKind::Parity: return mark;
  }
  return 1;
}

}  // namespace

NondetAutomaton eliminate_epsilon(const NondetAutomaton& a) {
  NondetAutomaton r;
  r.alphabet = a.alphabet;
  r.kind = a.kind;
  r.initial = a.initial;
  r.edges.resize(a.num_states());
  for (AutState p = 0; p < a.num_states(); ++p) {
    // (state, accumulated mark) pairs reachable from p by erased transitions.
    std::set<std::pair<AutState, unsigned>> seen{{p, neutral_mark(a.kind)}};
    std::deque<std::pair<AutState, unsigned>> queue(seen.begin(), seen.end());
    while (!queue.empty()) {
      const auto [u, m] = queue.front();
      queue.pop_front();
      for (const NondetEdge& e : a.edges[u]) {
        if (e.letter != kEpsilon) continue;
        const std::pair<AutState, unsigned> next{e.target, combine_marks(a.kind, m, e.mark)};
        if (seen.insert(next).second) queue.push_back(next);
      }
    }
    std::set<NondetEdge> out;
    for (const auto& [u, m] : seen)
      for (const NondetEdge& e : a.edges[u])
        if (e.letter != kEpsilon) out.insert({e.letter, e.target, combine_marks(a.kind, m, e.mark)});
    r.edges[p].assign(out.begin(), out.end());
  }
  return trim_nondet(r);
}

DetAutomaton miyano_hayashi(const NondetAutomaton& a) {
  if (a.has_epsilon()) throw Error(ErrorKind::Validation, "miyano_hayashi requires an epsilon-free automaton");
  if (a.kind != AcceptanceKind::CoBuchi) throw Error(ErrorKind::Validation, "miyano_hayashi expects co-Buchi marks");
  using Set = std::vector<AutState>;
  using Key = std::pair<Set, Set>;  // (support, obligations)
  const std::size_t letters = a.alphabet.size();
  DetAutomaton r = DetAutomaton::with_states(a.alphabet, 0, AcceptanceKind::CoBuchi);
  std::map<Key, AutState> index;
  std::vector<Key> order;
  auto intern = [&](Key k) {
    auto [it, inserted] = index.emplace(k, order.size());
    if (inserted) {
      r.add_state(k.second.empty() ? 1 : 0);  // breakpoints are rejecting
      order.push_back(std::move(k));
    }
    return it->second;
  };
  auto post = [&](const Set& from, Letter x, bool unmarked_only) {
    std::set<AutState> out;
    for (AutState s : from)
      for (const NondetEdge& e : a.edges[s])
        if (e.letter == x && (!unmarked_only || e.mark == 0)) out.insert(e.target);
    return Set(out.begin(), out.end());
  };
  r.initial = intern({Set{a.initial}, Set{}});
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (Letter x = 0; x < letters; ++x) {
      const Key& cur = order[i];
      Set support = post(cur.first, x, false);
      Set obligations = cur.second.empty() ? post(cur.first, x, true) : post(cur.second, x, true);
      const AutState t = intern({std::move(support), std::move(obligations)});
      r.next(i, x) = t;
    }
  }
  return r;
}

NondetAutomaton nba_of_parity(const NondetAutomaton& a) {
  std::vector<unsigned> evens;
  for (const auto& out : a.edges)
    for (const NondetEdge& e : out) {
      const unsigned p = edge_priority(a.kind, e.mark);
      if (p % 2 == 0) evens.push_back(p);
    }
  std::sort(evens.begin(), evens.end());
  evens.erase(std::unique(evens.begin(), evens.end()), evens.end());
  const std::size_t n = a.num_states();
  NondetAutomaton r;
  r.alphabet = a.alphabet;
  r.kind = AcceptanceKind::Buchi;
  r.initial = a.initial;
  r.edges.resize(n * (evens.size() + 1));
  for (AutState s = 0; s < n; ++s)
    for (const NondetEdge& e : a.edges[s]) {
      const unsigned p = edge_priority(a.kind, e.mark);
      r.edges[s].push_back({e.letter, e.target, 0});
      for (std::size_t i = 0; i < evens.size(); ++i) {
        if (p < evens[i]) continue;
        const unsigned mark = p == evens[i] ? 1 : 0;
        const std::size_t base = (i + 1) * n;
        r.edges[s].push_back({e.letter, base + e.target, mark});
        r.edges[base + s].push_back({e.letter, base + e.target, mark});
      }
    }
  return trim_nondet(r);
}

namespace {

NondetAutomaton as_nba(const NondetAutomaton& a) {
  return a.kind == AcceptanceKind::Buchi ? a : nba_of_parity(a);
}

}  // namespace

NondetAutomaton intersect_nba(const NondetAutomaton& a_in, const NondetAutomaton& b_in) {
  if (a_in.alphabet != b_in.alphabet) throw Error(ErrorKind::Validation, "intersect_nba: alphabet mismatch");
  if (a_in.has_epsilon() || b_in.has_epsilon()) throw Error(ErrorKind::Validation, "intersect_nba: epsilon transitions");
  const NondetAutomaton a = as_nba(a_in);
  const NondetAutomaton b = as_nba(b_in);
  using Key = std::tuple<AutState, AutState, int>;
  NondetAutomaton r;
  r.alphabet = a.alphabet;
  r.kind = AcceptanceKind::Buchi;
  std::map<Key, AutState> index;
  std::vector<Key> order;
  auto intern = [&](Key k) {
    auto [it, inserted] = index.emplace(k, order.size());
    if (inserted) {
      order.push_back(k);
      r.edges.emplace_back();
    }
    return it->second;
  };
  r.initial = intern({a.initial, b.initial, 0});
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [p, q, phase] = order[i];
    for (const NondetEdge& ea : a.edges[p])
      for (const NondetEdge& eb : b.edges[q]) {
        if (ea.letter != eb.letter) continue;
        int next_phase = phase;
        unsigned mark = 0;
        if (phase == 0 && ea.mark != 0) next_phase = 1;
        if (phase == 1 && eb.mark != 0) {
          next_phase = 0;
          mark = 1;
        }
        const AutState t = intern({ea.target, eb.target, next_phase});
        r.edges[i].push_back({ea.letter, t, mark});
      }
  }
  return r;
}

namespace {

// Safra tree in brace form: every NBA state in the tree is attached to its
// innermost brace (-1 for none), and braces[b] is the parent of brace b
// (parents always have smaller indices).
struct SafraTree {
  std::vector<std::pair<AutState, int>> nodes;  // sorted by NBA state
  std::vector<int> braces;
  auto operator<=>(const SafraTree&) const = default;
};

constexpr unsigned kNoColor = ~0u;

// True when brace `lhs` should win over `rhs` for a state reached through both:
// the older branch wins, and on the same branch the deeper brace wins.
bool prefer_brace(const std::vector<int>& braces, int lhs, int rhs) {
  int last_l = -2, last_r = -2;
  std::size_t len_l = 0, len_r = 0;
  while (lhs != rhs) {
    if (lhs > rhs) {
      last_l = lhs;
      ++len_l;
      lhs = braces[static_cast<std::size_t>(lhs)];
    } else {
      last_r = rhs;
      ++len_r;
      rhs = braces[static_cast<std::size_t>(rhs)];
    }
  }
  if (len_l > 0 && len_r > 0) return last_l < last_r;
  return len_l > len_r;
}

// Successor tree and emitted color (2b: brace b red, 2b+1: brace b green;
// min-odd convention; kNoColor when nothing happened).
std::pair<SafraTree, unsigned> safra_successor(const NondetAutomaton& a, const SafraTree& src, Letter x) {
  std::vector<int> braces = src.braces;
  std::map<AutState, int> nodes;
  for (const auto& [q, b] : src.nodes)
    for (const NondetEdge& e : a.edges[q]) {
      if (e.letter != x) continue;
      int nb = b;
      if (e.mark != 0) {
        nb = static_cast<int>(braces.size());
        braces.push_back(b);
      }
      auto [it, inserted] = nodes.emplace(e.target, nb);
      if (inserted) continue;
      if (prefer_brace(braces, nb, it->second))
        it->second = nb;
      else if (nb != b)
        braces.pop_back();
    }

  constexpr char kEmpty = 1;
  constexpr char kGreen = 2;
  std::vector<char> flags(braces.size(), kEmpty | kGreen);
  for (const auto& [q, b0] : nodes) {
    if (b0 < 0) continue;
    int b = b0;
    flags[static_cast<std::size_t>(b)] &= ~kGreen;  // holds a state directly
    while (b >= 0 && (flags[static_cast<std::size_t>(b)] & kEmpty)) {
      flags[static_cast<std::size_t>(b)] &= ~kEmpty;
      b = braces[static_cast<std::size_t>(b)];
    }
  }
  std::vector<std::size_t> highest_green(braces.size());
  std::vector<std::size_t> removed_before(braces.size());
  unsigned red = kNoColor, green = kNoColor;
  std::size_t removed = 0;
  for (std::size_t b = 0; b < braces.size(); ++b) {
    highest_green[b] = b;
    const int parent = braces[b];
    if (parent >= 0) {
      const auto p = static_cast<std::size_t>(parent);
      if (highest_green[p] != p || (flags[p] & kGreen)) {
        highest_green[b] = highest_green[p];
        flags[b] |= kEmpty;  // swallowed by a green ancestor
      }
    }
    if (flags[b] & kEmpty) {
      ++removed;
      red = std::min(red, static_cast<unsigned>(2 * b));
    } else if (flags[b] & kGreen) {
      green = std::min(green, static_cast<unsigned>(2 * b + 1));
    }
    removed_before[b] = removed;
  }
  SafraTree out;
  out.braces.assign(braces.size() - removed, -1);
  for (const auto& [q, b0] : nodes) {
    int nb = -1;
    if (b0 >= 0) {
      const std::size_t i = highest_green[static_cast<std::size_t>(b0)];
      const int parent = braces[i];
      const int renamed_parent =
          parent >= 0 ? parent - static_cast<int>(removed_before[static_cast<std::size_t>(parent)]) : -1;
      nb = static_cast<int>(i - removed_before[i]);
      out.braces[static_cast<std::size_t>(nb)] = renamed_parent;
    }
    out.nodes.emplace_back(q, nb);
  }
  return {std::move(out), std::min(red, green)};
}

}  // namespace

DetAutomaton determinize_nba(const NondetAutomaton& input) {
  if (input.has_epsilon()) throw Error(ErrorKind::Validation, "determinize_nba requires an epsilon-free automaton");
  const NondetAutomaton a = as_nba(input);
  const std::size_t letters = a.alphabet.size();

  std::map<SafraTree, std::size_t> index;
  std::vector<SafraTree> trees;
  std::vector<std::pair<std::size_t, unsigned>> step;  // [tree * letters + x] -> (tree, color)
  auto intern = [&](SafraTree t) {
    auto [it, inserted] = index.emplace(t, trees.size());
    if (inserted) trees.push_back(std::move(t));
    return it->second;
  };
  intern(SafraTree{{{a.initial, 0}}, {-1}});
  for (std::size_t i = 0; i < trees.size(); ++i)
    for (Letter x = 0; x < letters; ++x) {
      auto [succ, color] = safra_successor(a, trees[i], x);
      const std::size_t t = intern(std::move(succ));
      step.emplace_back(t, color);
    }

  // Min-odd colors c become min-even priorities c + 1; "no event" gets an
  // odd priority above every other one.
  unsigned top = 0;
  for (const auto& [t, c] : step)
    if (c != kNoColor) top = std::max(top, c + 1);
  const unsigned neutral = top % 2 == 1 ? top + 2 : top + 1;
  auto priority_of = [&](unsigned c) { return c == kNoColor ? neutral : c + 1; };

  // Move the transition priority onto the target state.
  DetAutomaton r = DetAutomaton::with_states(a.alphabet, 0, AcceptanceKind::Parity);
  std::map<std::pair<std::size_t, unsigned>, AutState> states;
  std::vector<std::pair<std::size_t, unsigned>> order;
  auto intern_state = [&](std::pair<std::size_t, unsigned> k) {
    auto [it, inserted] = states.emplace(k, order.size());
    if (inserted) {
      order.push_back(k);
      r.add_state(k.second);
    }
    return it->second;
  };
  r.initial = intern_state({0, neutral});
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter x = 0; x < letters; ++x) {
      const auto [t, c] = step[order[i].first * letters + x];
      const AutState target = intern_state({t, priority_of(c)});
      r.next(i, x) = target;
    }
  return r;
}

namespace {

// Letters of a shortest path from `from` to `to` using allowed edges.
std::optional<std::vector<Letter>> shortest_path(const std::vector<std::vector<std::pair<Letter, AutState>>>& graph,
                                                 AutState from, AutState to) {
  std::map<AutState, std::pair<AutState, Letter>> parent;
  std::deque<AutState> queue{from};
  parent[from] = {kNoState, 0};
  while (!queue.empty()) {
    const AutState u = queue.front();
    queue.pop_front();
    if (u == to) break;
    for (const auto& [x, v] : graph[u])
      if (parent.emplace(v, std::make_pair(u, x)).second) queue.push_back(v);
  }
  if (!parent.count(to)) return std::nullopt;
  std::vector<Letter> path;
  for (AutState v = to; v != from;) {
    const auto [u, x] = parent[v];
    path.push_back(x);
    v = u;
  }
  std::reverse(path.begin(), path.end());
  return path;
}

struct PriorityEdge {
  AutState source;
  Letter letter;
  AutState target;
  unsigned priority;
};

// Accepting-cycle search over a graph with prioritised edges.
EmptinessResult search_accepting_cycle(std::size_t n, AutState initial, const std::vector<PriorityEdge>& edges) {
  std::vector<std::vector<std::pair<Letter, AutState>>> full(n);
  detail::Adjacency adj(n);
  for (const PriorityEdge& e : edges) {
    full[e.source].emplace_back(e.letter, e.target);
    adj[e.source].push_back(e.target);
  }
  const auto reach = detail::reachable_from(adj, {initial});
  std::set<unsigned> evens;
  for (const PriorityEdge& e : edges)
    if (e.priority % 2 == 0 && reach[e.source]) evens.insert(e.priority);
  for (unsigned d : evens) {
    detail::Adjacency sub(n);
    std::vector<std::vector<std::pair<Letter, AutState>>> sub_full(n);
    for (const PriorityEdge& e : edges)
      if (reach[e.source] && e.priority >= d) {
        sub[e.source].push_back(e.target);
        sub_full[e.source].emplace_back(e.letter, e.target);
      }
    const auto scc = detail::strongly_connected_components(sub);
    for (const PriorityEdge& e : edges) {
      if (!reach[e.source] || e.priority != d) continue;
      if (scc.component[e.source] != scc.component[e.target]) continue;
      // Restrict the return path to the component.
      std::vector<std::vector<std::pair<Letter, AutState>>> inside(n);
      for (AutState u = 0; u < n; ++u)
        if (scc.component[u] == scc.component[e.source])
          for (const auto& [x, v] : sub_full[u])
            if (scc.component[v] == scc.component[e.source]) inside[u].emplace_back(x, v);
      auto stem = shortest_path(full, initial, e.source);
      auto back = shortest_path(inside, e.target, e.source);
      LassoWord w;
      w.stem = std::move(*stem);
      w.cycle.push_back(e.letter);
      w.cycle.insert(w.cycle.end(), back->begin(), back->end());
      return {false, std::move(w)};
    }
  }
  return {true, std::nullopt};
}

}  // namespace

EmptinessResult is_empty(const DetAutomaton& a) {
  const auto prio = state_priorities(a);
  std::vector<PriorityEdge> edges;
  for (AutState s = 0; s < a.num_states(); ++s)
    for (Letter x = 0; x < a.num_letters(); ++x)
      if (const AutState t = a.next(s, x); t != kNoState) edges.push_back({s, x, t, prio[s]});
  return search_accepting_cycle(a.num_states(), a.initial, edges);
}

EmptinessResult is_empty(const NondetAutomaton& a) {
  if (a.has_epsilon()) throw Error(ErrorKind::Validation, "is_empty requires an epsilon-free automaton");
  std::vector<PriorityEdge> edges;
  for (AutState s = 0; s < a.num_states(); ++s)
    for (const NondetEdge& e : a.edges[s]) edges.push_back({s, e.letter, e.target, edge_priority(a.kind, e.mark)});
  return search_accepting_cycle(a.num_states(), a.initial, edges);
}

DetAutomaton trim(const DetAutomaton& a) {
  std::vector<AutState> renum(a.num_states(), kNoState);
  std::vector<AutState> order{a.initial};
  renum[a.initial] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (Letter x = 0; x < a.num_letters(); ++x)
      if (const AutState t = a.next(order[i], x); t != kNoState && renum[t] == kNoState) {
        renum[t] = order.size();
        order.push_back(t);
      }
  DetAutomaton r = DetAutomaton::with_states(a.alphabet, order.size(), a.kind);
  r.initial = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    r.acceptance[i] = a.acceptance[order[i]];
    for (Letter x = 0; x < a.num_letters(); ++x)
      if (const AutState t = a.next(order[i], x); t != kNoState) r.next(i, x) = renum[t];
  }
  return r;
}

namespace {

DetAutomaton single_state(std::vector<std::string> alphabet, AcceptanceKind kind, bool accept) {
  DetAutomaton a = DetAutomaton::with_states(std::move(alphabet), 1, kind);
  switch (kind) {
    case AcceptanceKind::Buchi: a.acceptance[0] = accept ? 1 : 0; break;
    case AcceptanceKind::CoBuchi: a.acceptance[0] = accept ? 0 : 1; break;
    case AcceptanceKind::Parity: a.acceptance[0] = accept ? 0 : 1; break;
  }
  for (Letter x = 0; x < a.num_letters(); ++x) a.next(0, x) = 0;
  return a;
}

}  // namespace

DetAutomaton universal_automaton(std::vector<std::string> alphabet, AcceptanceKind kind) {
  return single_state(std::move(alphabet), kind, true);
}

DetAutomaton empty_automaton(std::vector<std::string> alphabet, AcceptanceKind kind) {
  return single_state(std::move(alphabet), kind, false);
}

DetAutomaton as_parity(const DetAutomaton& a) {
  DetAutomaton r = a;
  r.acceptance = state_priorities(a);
  r.kind = AcceptanceKind::Parity;
  return r;
}

}  // namespace opaq
