#pragma once

#include "opaq/model.hpp"

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace opaq {

using Letter = std::size_t;
using AutState = std::size_t;

inline constexpr AutState kNoState = std::numeric_limits<AutState>::max();
inline constexpr Letter kEpsilon = std::numeric_limits<Letter>::max();

enum class AcceptanceKind { Buchi, CoBuchi, Parity };

std::string to_string(AcceptanceKind kind);

/// The interleaved alphabet Q u (Act x Sigma) of a model. State symbols come
/// first (one per state, in state order), then one symbol per (action, label)
/// pair that occurs in a transition, ordered by (action id, label id).
struct RunAlphabet {
  std::vector<std::string> symbols;
  std::vector<Letter> state_symbol;
  std::map<std::pair<ActionId, LabelId>, Letter> step_symbol;

  bool is_state_symbol(Letter x) const { return x < state_symbol.size(); }
  Letter step(ActionId a, LabelId l) const { return step_symbol.at({a, l}); }
};

RunAlphabet run_alphabet(const LabeledMdp& mdp);
std::string state_symbol_name(const std::string& state);
std::string step_symbol_name(const std::string& action, const std::string& label);

/// Interleaved word q0 (a0,l0) q1 ... of a finite run.
std::vector<Letter> run_word(const RunAlphabet& alphabet, const FiniteRun& run);

struct LassoWord {
  std::vector<Letter> stem;
  std::vector<Letter> cycle;
};

/// The word of a lasso run: the stem word followed by the cycle word with
/// the repeated first state symbol dropped.
LassoWord lasso_word(const RunAlphabet& alphabet, const LassoRun& lasso);

/// Deterministic automaton with state-based acceptance. For Buchi and
/// co-Buchi, acceptance[s] is 1 iff s is in F; for parity it is the
/// priority of s under min-even semantics. Missing transitions are kNoState.
struct DetAutomaton {
  std::vector<std::string> alphabet;
  std::vector<AutState> delta;  // delta[s * alphabet.size() + letter]
  AutState initial = 0;
  AcceptanceKind kind = AcceptanceKind::Buchi;
  std::vector<unsigned> acceptance;

  std::size_t num_states() const { return acceptance.size(); }
  std::size_t num_letters() const { return alphabet.size(); }
  AutState next(AutState s, Letter x) const { return delta[s * alphabet.size() + x]; }
  AutState& next(AutState s, Letter x) { return delta[s * alphabet.size() + x]; }
  bool is_complete() const;
  /// Adds a state with no outgoing transitions and returns its index.
  AutState add_state(unsigned acc);

  static DetAutomaton with_states(std::vector<std::string> alphabet, std::size_t states, AcceptanceKind kind);
};

/// Min-even priorities equivalent to the acceptance of `a`.
std::vector<unsigned> state_priorities(const DetAutomaton& a);

struct NondetEdge {
  Letter letter = 0;  // kEpsilon for an erased symbol
  AutState target = 0;
  /// Buchi: 1 marks an accepting transition. co-Buchi: 1 marks a rejecting
  /// transition. Parity: the transition priority (min-even).
  unsigned mark = 0;

  auto operator<=>(const NondetEdge&) const = default;
};

/// Nondeterministic automaton with transition-based acceptance.
struct NondetAutomaton {
  std::vector<std::string> alphabet;
  std::vector<std::vector<NondetEdge>> edges;
  AutState initial = 0;
  AcceptanceKind kind = AcceptanceKind::Buchi;

  std::size_t num_states() const { return edges.size(); }
  bool has_epsilon() const;
};

/// Runs A on the stem, pumps the cycle until a (state, position) pair
/// repeats, and applies the acceptance condition to the states on the loop.
/// A missing transition rejects. Throws opaq::Error for a letter outside the alphabet.
bool accepts_lasso(const DetAutomaton& a, const LassoWord& w);

/// Adds a sink when some transition is missing: excluded from Buchi F,
/// included in co-Buchi F, and given the largest odd priority for parity.
DetAutomaton complete(DetAutomaton a);

/// Complement of a complete deterministic automaton: Buchi(F) <-> co-Buchi(F),
/// parity priorities shifted by one.
DetAutomaton dualize(const DetAutomaton& a);

/// Two-phase product of complete deterministic Buchi automata.
DetAutomaton intersect_dba(const DetAutomaton& a, const DetAutomaton& b);

/// Transition-based view of a deterministic automaton: every transition
/// leaving s carries the acceptance of s. Missing transitions are dropped.
NondetAutomaton to_nondet(const DetAutomaton& a);

/// Removes epsilon transitions. A collapsed transition carries the combined
/// mark of the erased path and the letter transition ending it (OR for
/// Buchi/co-Buchi marks, minimum for priorities); states unreachable from
/// the initial state are dropped.
NondetAutomaton eliminate_epsilon(const NondetAutomaton& a);

/// Breakpoint construction from a nondeterministic co-Buchi automaton
/// (rejecting transition marks) to an equivalent complete DCA.
DetAutomaton miyano_hayashi(const NondetAutomaton& a);

/// Parity transition marks -> Buchi transition marks, guessing the even
/// priority seen infinitely often. Buchi and co-Buchi inputs are converted first.
NondetAutomaton nba_of_parity(const NondetAutomaton& a);

/// Product of two nondeterministic Buchi automata over the same alphabet.
NondetAutomaton intersect_nba(const NondetAutomaton& a, const NondetAutomaton& b);

/// Safra-Piterman determinization of an epsilon-free NBA (transition marks)
/// into a complete state-based DPA. States are numbered in breadth-first
/// discovery order, so the output is reproducible.
DetAutomaton determinize_nba(const NondetAutomaton& a);

struct EmptinessResult {
  bool empty = true;
  std::optional<LassoWord> witness;
};

/// Emptiness by accepting-cycle search per even priority; a returned witness
/// is accepted by the automaton.
EmptinessResult is_empty(const DetAutomaton& a);
EmptinessResult is_empty(const NondetAutomaton& a);

/// Copy of `a` keeping only states reachable from the initial state.
DetAutomaton trim(const DetAutomaton& a);

/// Accept-all / accept-nothing complete automata over an alphabet.
DetAutomaton universal_automaton(std::vector<std::string> alphabet, AcceptanceKind kind = AcceptanceKind::Buchi);
DetAutomaton empty_automaton(std::vector<std::string> alphabet, AcceptanceKind kind = AcceptanceKind::Buchi);

/// Same language, parity acceptance.
DetAutomaton as_parity(const DetAutomaton& a);

}  // namespace opaq
