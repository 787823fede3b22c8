#pragma once

#include "opaq/automata.hpp"
#include "opaq/disclosure.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace opaq {

inline constexpr std::size_t kDefaultSupportCap = std::size_t{1} << 16;
/// Bound on the summed size of all reachable supports.
inline constexpr std::size_t kMaxSupportEntries = std::size_t{1} << 22;

/// Reachable belief supports of a POMDP: sets of states of one observation
/// class, reachable from {initial} by (action, observed class) updates.
struct BeliefSupportMdp {
  std::vector<std::vector<StateId>> supports;  // sorted
  /// successor[b][{action, class}] is the support after playing `action`
  /// from support b and observing `class`.
  std::vector<std::map<std::pair<ActionId, std::size_t>, std::size_t>> successor;
  std::size_t initial = 0;
  /// Whether some / every state of the support is accepting.
  std::vector<bool> any_accepting;
  std::vector<bool> all_accepting;
};

/// Throws opaq::Error (Resource) when more than `cap` supports are reachable
/// or their sizes sum to more than kMaxSupportEntries.
BeliefSupportMdp belief_support_mdp(const PartiallyObservableMdp& pomdp, const std::vector<bool>& accepting,
                                    std::size_t cap = kDefaultSupportCap);
BeliefSupportMdp belief_support_mdp(const ProductPomdp& product, std::size_t cap = kDefaultSupportCap);

/// Canonical rendering "{a,b}" of a support.
std::string support_name(const LabeledMdp& mdp, const std::vector<StateId>& support);

struct AlmostSureResult {
  bool yes = false;
  /// On YES: observation-based scheduler whose memory is the current belief
  /// support, playing uniformly among the actions that stay winning.
  std::optional<Scheduler> witness;
  Rational witness_value;  // exact Buchi probability of the witness (1 on YES)
  std::size_t supports = 0;
  std::size_t winning_pairs = 0;
};

/// Is there an observation-based scheduler visiting `accepting` infinitely
/// often with probability 1?
AlmostSureResult almost_sure_buchi(const PartiallyObservableMdp& pomdp, const std::vector<bool>& accepting,
                                   std::size_t cap = kDefaultSupportCap);

/// Throws opaq::Error (Unsupported) when the product is not Buchi.
AlmostSureResult almost_sure_buchi(const ProductPomdp& product, std::size_t cap = kDefaultSupportCap);

struct PomdpDisclosureSolution {
  DisclosureAutomaton discl;
  ProductPomdp product;
  AlmostSureResult result;
};

/// Almost-sure disclosure under partial observation for a Buchi secret.
/// Other secrets throw opaq::Error (Unsupported).
PomdpDisclosureSolution almost_sure_disclosure_pomdp(const PartiallyObservableMdp& model, const DetAutomaton& secret,
                                                     const Projection& pi, std::size_t cap = kDefaultSupportCap);

/// Message used when a query has no decision procedure under partial observation.
std::string undecidable_query_message(const std::string& query);

struct OracleResult {
  bool yes = false;
  /// Memory size of the witness on YES, otherwise the bound that was exhausted.
  std::size_t memory = 0;
  std::optional<Scheduler> witness;
  std::size_t explored = 0;
};

/// Searches deterministic observation-based schedulers with at most
/// `memory_bound` memory states (updates read the action and the observed
/// class) for one satisfying the parity objective with probability 1.
/// NO only means that no such scheduler exists up to the bound. Throws
/// opaq::Error (Resource) after `cap` search nodes.
OracleResult enumerate_scheduler_oracle(const PartiallyObservableMdp& pomdp, std::span<const unsigned> priorities,
                                        std::size_t memory_bound, std::size_t cap = 5'000'000);

}  // namespace opaq
