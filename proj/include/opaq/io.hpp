#pragma once

#include "opaq/error.hpp"
#include "opaq/model.hpp"
#include "opaq/observation.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace opaq {

/// Contents of a model file.
struct ModelDocument {
  /// Identity partition when the file has no `equivalence` block.
  PartiallyObservableMdp model;
  bool has_equivalence = false;
  std::optional<Projection> projection;
  /// Optional per-state priorities written by --emit-product.
  std::optional<std::vector<unsigned>> priorities;

  /// No equivalence, or only singleton classes.
  bool perfect_observation() const;
  /// The declared projection, or the identity projection.
  Projection projection_or_identity() const;

  friend bool operator==(const ModelDocument&, const ModelDocument&) = default;
};

/// Malformed model file. Each diagnostic message carries a line number when
/// one can be located.
class ModelError : public Error {
 public:
  explicit ModelError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Parses the JSON model format. Unknown fields, unknown names, a bad
/// partition or an initial distribution throw ModelError. Distribution sums
/// and enabledness are left to validate().
ModelDocument parse_model(std::string_view text);
ModelDocument load_model(const std::filesystem::path& path);

std::string print_model(const ModelDocument& doc);
nlohmann::json model_to_json(const ModelDocument& doc);

nlohmann::json projection_to_json(const LabeledMdp& mdp, const Projection& pi);

/// Scheduler tables with state, action and memory names. Memoryless
/// deterministic schedulers are rendered as a plain state -> action map.
nlohmann::json scheduler_to_json(const LabeledMdp& mdp, const Scheduler& scheduler);

std::string read_file(const std::filesystem::path& path);

}  // namespace opaq
