#pragma once

#include "opaq/automata.hpp"
#include "opaq/disclosure.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opaq {

/// A strongly connected sub-MDP closed under the listed actions.
struct EndComponent {
  std::vector<StateId> states;  // sorted
  std::map<StateId, std::vector<ActionId>> actions;
};

/// Maximal end components of the sub-MDP on `alive` (all states when empty).
std::vector<EndComponent> mec_decomposition(const LabeledMdp& mdp, const std::vector<bool>& alive = {});

/// States lying in some end component whose minimum priority is even, with
/// one such component per state.
struct EvenEndComponents {
  std::vector<bool> states;
  std::vector<EndComponent> witnesses;  // pairwise disjoint
};

EvenEndComponents even_end_components(const LabeledMdp& mdp, std::span<const unsigned> priorities);
std::vector<bool> even_ec_states(const LabeledMdp& mdp, std::span<const unsigned> priorities);

struct ReachabilityResult {
  std::vector<Rational> value;
  std::vector<ActionId> strategy;  // memoryless, one action per state
};

/// Exact maximal probability of reaching `target`, with a memoryless
/// deterministic strategy attaining it from every state.
ReachabilityResult max_reachability(const LabeledMdp& mdp, const std::vector<bool>& target);

struct ValueCertificate {
  Rational value;
  Scheduler scheduler;  // memoryless deterministic
  Rational witness_chain_value;
};

/// Maximal probability of the min-even parity condition. The scheduler is
/// checked on its induced chain; a mismatch throws std::logic_error.
ValueCertificate max_parity_probability(const LabeledMdp& mdp, std::span<const unsigned> priorities);

struct IntervalResult {
  double lower = 0;
  double upper = 1;
  std::size_t iterations = 0;
};

/// Floating interval iteration for the same quantity as
/// max_parity_probability, from the initial state. Stops once
/// upper - lower <= tolerance or after max_iterations.
IntervalResult interval_parity_probability(const LabeledMdp& mdp, std::span<const unsigned> priorities,
                                           double tolerance = 1e-10, std::size_t max_iterations = 1000000);

struct DisclosureSolution {
  DisclosureAutomaton discl;
  ProductPomdp product;
  ValueCertificate certificate;
};

/// PD of the secret in a perfectly observed model.
DisclosureSolution disclosure_value(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi);

enum class QueryKind { Value, Threshold, AlmostSureOpacity, LimitDisclosure, AlmostSureDisclosure };

struct Query {
  QueryKind kind = QueryKind::Value;
  Rational delta;  // Threshold only
};

std::string to_string(QueryKind kind);

struct Verdict {
  Query query;
  Rational value;
  /// Empty for Value queries.
  std::optional<bool> holds;
  DisclosureSolution solution;
};

/// Answers a query under perfect observation. Throws opaq::Error for a
/// threshold outside [0, 1].
Verdict decide(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi, const Query& query);

/// Almost-sure opacity of both the secret and its complement.
struct SymmetricVerdict {
  Verdict secret;
  Verdict complement;
  bool holds = false;
};

SymmetricVerdict decide_symmetric(const LabeledMdp& model, const DetAutomaton& secret, const Projection& pi);

}  // namespace opaq
