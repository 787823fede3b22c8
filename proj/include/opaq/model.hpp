#pragma once

#include "opaq/rational.hpp"

#include <compare>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opaq {

using StateId = std::size_t;
using ActionId = std::size_t;
using LabelId = std::size_t;
using MemoryId = std::size_t;

inline constexpr LabelId kAnyLabel = std::numeric_limits<LabelId>::max();

struct Outcome {
  LabelId label = 0;
  StateId target = 0;
  Rational probability;

  friend bool operator==(const Outcome&, const Outcome&) = default;
};

/// Delta(q, action): a distribution over (label, successor) pairs.
struct Choice {
  ActionId action = 0;
  std::vector<Outcome> outcomes;

  friend bool operator==(const Choice&, const Choice&) = default;
};

/// Markov decision process whose probabilistic transitions carry labels.
/// Plain data: it may hold an invalid model, see validate().
struct LabeledMdp {
  std::vector<std::string> states;
  std::vector<std::string> labels;
  std::vector<std::string> actions;
  /// choices[q] lists the enabled actions of q in increasing action id.
  std::vector<std::vector<Choice>> choices;
  StateId initial = 0;

  std::size_t num_states() const { return states.size(); }
  const Choice* find_choice(StateId q, ActionId a) const;
  std::optional<StateId> state_index(std::string_view name) const;
  std::optional<ActionId> action_index(std::string_view name) const;
  std::optional<LabelId> label_index(std::string_view name) const;

  friend bool operator==(const LabeledMdp&, const LabeledMdp&) = default;
};

/// LabeledMdp together with the partition of its states into observation
/// classes; observation_class[q] is the class index of q.
struct PartiallyObservableMdp {
  LabeledMdp base;
  std::vector<std::size_t> observation_class;

  std::size_t num_classes() const;
  bool equivalent(StateId p, StateId q) const { return observation_class[p] == observation_class[q]; }

  friend bool operator==(const PartiallyObservableMdp&, const PartiallyObservableMdp&) = default;
};

/// Every state in its own class (perfect observation).
PartiallyObservableMdp with_identity_partition(LabeledMdp mdp);

struct Diagnostic {
  std::string code;
  std::string message;
};

std::vector<Diagnostic> validate(const LabeledMdp& mdp);
std::vector<Diagnostic> validate(const PartiallyObservableMdp& pomdp);

/// Actions with Delta(q, .) defined. Throws std::out_of_range for unknown q.
std::vector<ActionId> enabled_actions(const LabeledMdp& mdp, StateId q);

struct Step {
  ActionId action = 0;
  LabelId label = 0;

  friend bool operator==(const Step&, const Step&) = default;
};

/// q0 (a0,l0) q1 ... qn, stored as n+1 states and n steps.
struct FiniteRun {
  std::vector<StateId> states;
  std::vector<Step> steps;

  std::size_t length() const { return steps.size(); }
  StateId last() const { return states.back(); }
  /// Appends one step; the caller guarantees that this run ends where `next` is taken from.
  FiniteRun extended(Step step, StateId next) const;
  /// Concatenation; other.states.front() must equal last().
  FiniteRun concat(const FiniteRun& other) const;
};

/// stem . cycle^omega, where cycle starts and ends at stem.last().
struct LassoRun {
  FiniteRun stem;
  FiniteRun cycle;
};

/// Empty string when the run is a valid run of mdp, otherwise the reason.
std::string check_run(const LabeledMdp& mdp, const FiniteRun& run);
std::string check_lasso(const LabeledMdp& mdp, const LassoRun& lasso);

struct ActionWeight {
  ActionId action = 0;
  Rational weight;
  friend bool operator==(const ActionWeight&, const ActionWeight&) = default;
};
using ActionDistribution = std::vector<ActionWeight>;

struct MemoryWeight {
  MemoryId memory = 0;
  Rational weight;
  friend bool operator==(const MemoryWeight&, const MemoryWeight&) = default;
};
using MemoryDistribution = std::vector<MemoryWeight>;

struct MemoryUpdateKey {
  MemoryId memory = 0;
  ActionId action = 0;
  LabelId label = kAnyLabel;
  StateId state = 0;
  auto operator<=>(const MemoryUpdateKey&) const = default;
};

/// Finite-memory scheduler (M, m0, choice, update).
///
/// Both tables are sparse. A missing choice entry plays the first enabled
/// action of the state deterministically; a missing update entry keeps the
/// memory unchanged. Update entries with label == kAnyLabel apply to every
/// label. When observation_based is set, the update never reads the label,
/// so only kAnyLabel entries are allowed.
struct Scheduler {
  std::size_t memory_size = 1;
  MemoryId initial_memory = 0;
  std::map<std::pair<MemoryId, StateId>, ActionDistribution> choice;
  std::map<MemoryUpdateKey, MemoryDistribution> update;
  bool observation_based = false;
  /// Optional human-readable memory names, used by reports.
  std::vector<std::string> memory_names;

  ActionDistribution choice_at(const LabeledMdp& mdp, MemoryId m, StateId q) const;
  MemoryDistribution update_at(MemoryId m, ActionId action, LabelId label, StateId next) const;

  /// Deterministic memoryless scheduler playing action_of[q] in q.
  static Scheduler memoryless(const std::vector<ActionId>& action_of);
};

std::vector<Diagnostic> validate(const LabeledMdp& mdp, const Scheduler& scheduler);
std::vector<Diagnostic> validate(const PartiallyObservableMdp& pomdp, const Scheduler& scheduler);

/// P_sigma(C_rho), marginalising the scheduler memory by forward summation.
/// Throws std::invalid_argument when rho is not a run of mdp.
Rational cone_probability(const LabeledMdp& mdp, const Scheduler& scheduler, const FiniteRun& run);

struct ChainState {
  MemoryId memory = 0;
  StateId state = 0;
  auto operator<=>(const ChainState&) const = default;
};

struct ChainEdge {
  std::size_t target = 0;
  Rational probability;
  ActionId action = 0;
  LabelId label = 0;
};

/// Labeled Markov chain over (memory, state) pairs; reachable part only.
struct MarkovChain {
  std::vector<ChainState> states;
  std::vector<std::vector<ChainEdge>> edges;
  std::size_t initial = 0;

  std::size_t size() const { return states.size(); }
};

MarkovChain induced_chain(const LabeledMdp& mdp, const Scheduler& scheduler);

/// priority[q] for each model state -> priority per chain state.
std::vector<unsigned> lift_priorities(const MarkovChain& chain, std::span<const unsigned> state_priority);

/// Probability that a run of the chain satisfies min-even parity over the
/// given per-chain-state priorities (Buchi F is priorities 0 on F, 1 elsewhere).
Rational chain_omega_probability(const MarkovChain& chain, std::span<const unsigned> priority);

/// Buchi(F) and co-Buchi(F) as min-even priorities.
std::vector<unsigned> buchi_priorities(const std::vector<bool>& accepting);
std::vector<unsigned> cobuchi_priorities(const std::vector<bool>& rejecting);

}  // namespace opaq
