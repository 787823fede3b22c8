#pragma once

#include "opaq/automata.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace opaq {

/// Reads a deterministic HOA automaton with state-based Buchi (Inf(0)),
/// co-Buchi (Fin(0)), "parity min even k", t or f acceptance. The result
/// has one letter per atomic proposition: letter i is the valuation where
/// only AP i holds. Throws opaq::Error (Validation) on syntax errors,
/// nondeterminism, transition-based marks or other acceptance conditions.
DetAutomaton parse_hoa(std::string_view text);

/// Same format without the determinism requirement. State marks become
/// marks on the outgoing transitions.
NondetAutomaton parse_hoa_nondet(std::string_view text);

/// Writes `a` with its alphabet as the AP list. parse_hoa(print_hoa(a)) == a.
std::string print_hoa(const DetAutomaton& a, const std::string& name = "");

/// Rebinds an automaton read by parse_hoa to the run alphabet of `mdp`.
/// APs must have the form "state:<q>" or "step:<action>,<label>"; APs
/// naming no symbol of the model are never read, so one secret can serve
/// several models. Run symbols with no AP get no transition; the result is
/// completed. With `trace_only`, every state
/// symbol becomes a self-loop, so the automaton only reads steps.
DetAutomaton bind_to_model(const DetAutomaton& over_aps, const LabeledMdp& mdp, bool trace_only);

DetAutomaton load_hoa(const std::filesystem::path& path);
NondetAutomaton load_hoa_nondet(const std::filesystem::path& path);

}  // namespace opaq
