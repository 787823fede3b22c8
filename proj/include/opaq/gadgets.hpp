#pragma once

#include "opaq/automata.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include <string>
#include <vector>

namespace opaq {

/// Two copies of a POMDP behind a fair coin, with a secret that asks for
/// Acc(F) in copy 1 and accepts everything in copy 2. Observing a run of
/// either copy yields the underlying run of the source POMDP, so the
/// disclosure of the secret under a lifted scheduler equals the probability
/// of Acc(F) in the source.
struct GadgetInstance {
  PartiallyObservableMdp gadget;
  DetAutomaton secret;  // over run_alphabet(gadget.base)
  Projection projection;

  StateId init_state = 0;
  ActionId init_action = 0;
  LabelId branch_label[2] = {0, 0};
  /// copy_state[i][q] is the copy of source state q in copy i + 1.
  std::vector<StateId> copy_state[2];

  std::size_t source_states = 0;
  std::vector<StateId> target;
  AcceptanceKind acceptance = AcceptanceKind::Buchi;
  bool absorbing = false;
};

/// `acceptance` is Buchi or co-Buchi. With `absorbing`, every enabled
/// action of a copy-1 state in F becomes a self-loop labeled with the first
/// label of its original distribution.
GadgetInstance build_gadget(const PartiallyObservableMdp& source, const std::vector<StateId>& target,
                            AcceptanceKind acceptance, bool absorbing);

/// Copy of `source` where every enabled action of a state in `target`
/// becomes a self-loop labeled with the first label of its distribution, so
/// Buchi(target) holds exactly on the runs that reach it.
PartiallyObservableMdp make_absorbing(const PartiallyObservableMdp& source, const std::vector<StateId>& target);

/// Scheduler on the gadget playing the init action first and then the
/// source scheduler in whichever copy was entered. Throws opaq::Error
/// unless sigma is observation-based.
Scheduler lift_scheduler(const Scheduler& sigma, const GadgetInstance& g);

/// Scheduler on the source read off copy 1. Requires an observation-based
/// input whose first step is deterministic; throws opaq::Error otherwise.
Scheduler project_scheduler(const Scheduler& sigma, const GadgetInstance& g);

}  // namespace opaq
