#pragma once

#include "opaq/automata.hpp"
#include "opaq/model.hpp"

#include <cstddef>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace opaq {

using ObsId = std::size_t;
inline constexpr ObsId kErased = std::numeric_limits<ObsId>::max();

/// pi : Q u (Act x Sigma) -> Gamma u {eps}. Symbols without an entry are erased.
struct Projection {
  std::vector<std::string> observables;
  std::vector<ObsId> state_obs;  // per model state
  std::map<std::pair<ActionId, LabelId>, ObsId> step_obs;

  ObsId of_state(StateId q) const { return q < state_obs.size() ? state_obs[q] : kErased; }
  ObsId of_step(ActionId a, LabelId l) const;

  friend bool operator==(const Projection&, const Projection&) = default;
};

/// Every run symbol observed as itself.
Projection identity_projection(const LabeledMdp& mdp);

std::vector<Diagnostic> validate(const LabeledMdp& mdp, const Projection& pi);

/// pi applied to each letter of the run alphabet (kErased for eps).
std::vector<ObsId> letter_map(const Projection& pi, const RunAlphabet& alphabet);

/// Observation of a finite run, with erased symbols dropped.
std::vector<ObsId> observe(const Projection& pi, const FiniteRun& run);

/// Observation of a lasso run. An empty cycle means the observation is the
/// finite word `stem`.
LassoWord observe(const Projection& pi, const LassoRun& run);

/// Deterministic (partial) Buchi automaton over the run alphabet accepting
/// exactly the infinite runs of the model.
DetAutomaton model_run_automaton(const LabeledMdp& mdp, const RunAlphabet& alphabet);

/// Language of `a` intersected with the runs of the model, completed.
DetAutomaton restrict_to_model(const DetAutomaton& a, const LabeledMdp& mdp);

/// Image under pi of a nondeterministic automaton over the run alphabet:
/// relabel, then eliminate the erased transitions. Result is over Gamma.
NondetAutomaton image_automaton(const NondetAutomaton& a, const Projection& pi, const RunAlphabet& alphabet);

/// Image of a deterministic Buchi or co-Buchi automaton. Parity input must
/// go through nba_of_parity first; passing it here throws.
NondetAutomaton image_automaton(const DetAutomaton& a, const Projection& pi, const RunAlphabet& alphabet);

/// O^{-1}: each run symbol x moves B on pi(x), or stays put when pi(x) = eps.
DetAutomaton inverse_image_automaton(const DetAutomaton& b, const Projection& pi, const RunAlphabet& alphabet);

struct DivergenceReport {
  bool divergent = true;
  /// One entry per strongly connected set of reachable states that can
  /// cycle without emitting an observation.
  std::vector<std::vector<StateId>> silent_cycles;
  std::vector<Diagnostic> diagnostics;
};

DivergenceReport check_observation_divergence(const LabeledMdp& mdp, const Projection& pi);

}  // namespace opaq
