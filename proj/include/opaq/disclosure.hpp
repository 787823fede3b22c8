#pragma once

#include "opaq/automata.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include <string>
#include <utility>
#include <vector>

namespace opaq {

struct PipelineStage {
  std::string name;
  std::size_t states = 0;
};

/// Deterministic complete automaton over the model's run alphabet for the
/// runs of the secret whose observation is produced by no non-secret run.
struct DisclosureAutomaton {
  DetAutomaton automaton;
  std::vector<PipelineStage> provenance;
};

/// Buchi secret: complement, image, breakpoint determinization, inverse
/// image, complement, intersection. Throws for a non-Buchi secret or a
/// projection that admits silent cycles.
DisclosureAutomaton build_discl_dba(const DetAutomaton& secret, const Projection& pi, const LabeledMdp& model);

/// Any deterministic secret, through parity automata and one final
/// determinization of the intersection.
DisclosureAutomaton build_discl_dpa(const DetAutomaton& secret, const Projection& pi, const LabeledMdp& model);

/// build_discl_dba for Buchi secrets, build_discl_dpa otherwise.
DisclosureAutomaton build_discl(const DetAutomaton& secret, const Projection& pi, const LabeledMdp& model);

/// A plain state (q, d) or a pending state (q?, d) of the product.
struct ProductState {
  StateId model_state = 0;
  bool pending = false;
  AutState automaton_state = 0;
  auto operator<=>(const ProductState&) const = default;
};

/// A (x) D over the reachable fragment. Pending states only offer the fresh
/// action `init_action`, which reads the state symbol with probability 1.
struct ProductPomdp {
  PartiallyObservableMdp pomdp;
  std::vector<ProductState> meta;
  /// Min-even priority of each product state (that of its automaton part).
  std::vector<unsigned> priority;
  /// Buchi acceptance of each product state when D is Buchi, else empty.
  std::vector<bool> accepting;
  ActionId init_action = 0;
  LabelId init_label = 0;

  const LabeledMdp& mdp() const { return pomdp.base; }
};

ProductPomdp product(const PartiallyObservableMdp& model, const DetAutomaton& d);
ProductPomdp product(const LabeledMdp& model, const DetAutomaton& d);

struct ProjectedRun {
  FiniteRun model_run;
  /// Automaton components along the product run.
  std::vector<AutState> automaton_run;
};

/// Drops the pending states and init steps. Throws std::invalid_argument for
/// a run that is not a run of the product.
ProjectedRun project_run(const ProductPomdp& product, const FiniteRun& run);

/// The model scheduler played on the product: init_action at pending states,
/// memory untouched by init steps.
Scheduler lift_to_product(const Scheduler& sigma, const ProductPomdp& product);

/// Picks `base`, or `base` followed by primes, so that it avoids `taken`.
std::string fresh_name(std::string base, const std::vector<std::string>& taken);

}  // namespace opaq
