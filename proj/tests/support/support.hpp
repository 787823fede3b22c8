#pragma once

#include "opaq/automata.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace opaq::testing {

using Rng = std::mt19937_64;

/// OPAQ_SEED from the environment, or a fixed default.
std::uint64_t base_seed();
Rng make_rng(std::uint64_t salt);

std::string fixture(const std::string& name);

DetAutomaton random_det(Rng& rng, std::size_t states, std::size_t letters, AcceptanceKind kind);
NondetAutomaton random_nondet(Rng& rng, std::size_t states, std::size_t letters, AcceptanceKind kind);

/// Every lasso over `letters` letters with |stem| <= max_stem and
/// 1 <= |cycle| <= max_cycle.
std::vector<LassoWord> all_lassos(std::size_t letters, std::size_t max_stem, std::size_t max_cycle);

/// Acceptance of a lasso by an epsilon-free nondeterministic automaton,
/// searched on the product of the automaton with the lasso positions.
bool nondet_accepts(const NondetAutomaton& a, const LassoWord& w);

/// Random valid model. Every state enables at least one action; each choice
/// has one to three outcomes with probabilities from {1, 1/2, 1/3, 2/3, 1/4, 3/4}.
LabeledMdp random_mdp(Rng& rng, std::size_t states, std::size_t actions, std::size_t labels);

/// Copy of `mdp` where the label of a step is a random function of its
/// source, action and target; outcomes sharing a target are merged. Runs of
/// the copy are then determined by their states and actions.
LabeledMdp with_target_labels(Rng& rng, LabeledMdp mdp);

/// Random valid POMDP with at most `classes` observation classes. States of a
/// class enable the same actions.
PartiallyObservableMdp random_pomdp(Rng& rng, std::size_t states, std::size_t actions, std::size_t labels,
                                    std::size_t classes, bool all_actions = false);

/// Random projection onto {x, y}, redrawn until every cycle emits a symbol.
Projection random_projection(Rng& rng, const LabeledMdp& mdp);

/// Lasso runs of the model from its initial state, |stem| <= max_stem,
/// 1 <= |cycle| <= max_cycle, at most `cap` of them.
std::vector<LassoRun> model_lassos(const LabeledMdp& mdp, std::size_t max_stem, std::size_t max_cycle,
                                   std::size_t cap = 100000);

/// Is there a run of the model whose observation is the infinite word `w`
/// and on which `a` sees a least priority infinitely often of the given
/// parity (0: accepted, 1: rejected)? Needs a divergent projection.
bool brute_observation_run(const LabeledMdp& mdp, const DetAutomaton& a, const Projection& pi, const LassoWord& w,
                           unsigned parity);

/// Membership of a model lasso in the disclosure language: the run is in the
/// secret and no run of the model with the same observation avoids it.
/// `secret` is a complete automaton over run_alphabet(mdp).
bool brute_disclosed(const LabeledMdp& mdp, const DetAutomaton& secret, const Projection& pi, const LassoRun& run);

/// Largest parity probability over memoryless deterministic schedulers,
/// or nullopt when there are more than `cap` of them.
std::optional<Rational> brute_max_parity(const LabeledMdp& mdp, std::span<const unsigned> priorities,
                                         std::size_t cap = 4096);

/// Graph with edge priorities. Answers whether some cycle reachable from a
/// node has a least priority of the given parity (0 even, 1 odd).
struct PriorityGraph {
  std::vector<std::vector<std::pair<std::size_t, unsigned>>> edges;
  bool has_cycle_with_min_parity(std::size_t from, unsigned parity) const;
};

}  // namespace opaq::testing
