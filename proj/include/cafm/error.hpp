#ifndef CAFM_ERROR_HPP
#define CAFM_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cafm {

/// Error categories raised by the library. The textual names are part of the
/// CLI and broker wire formats.
enum class Errc {
  invalid_argument,
  io_error,
  unknown_feature,
  too_large,
  no_such_feature,
  no_such_value,
  syntax_error,
  schema_error,
  semantic_error,
  unselected_feature,
  contradictory_observations,
  no_matching_service,
  qoc_unsatisfiable,
  insufficient_resources,
  unknown_id,
  duplicate_id,
  invalid_offer,
  unexpected_message,
  unbalanced_endif,
  unterminated_if,
  else_without_if,
  malformed_directive,
};

inline constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::io_error: return "io-error";
    case Errc::unknown_feature: return "unknown-feature";
    case Errc::too_large: return "too-large";
    case Errc::no_such_feature: return "no-such-feature";
    case Errc::no_such_value: return "no-such-value";
    case Errc::syntax_error: return "syntax-error";
    case Errc::schema_error: return "schema-error";
    case Errc::semantic_error: return "semantic-error";
    case Errc::unselected_feature: return "unselected-feature";
    case Errc::contradictory_observations: return "contradictory-observations";
    case Errc::no_matching_service: return "no-matching-service";
    case Errc::qoc_unsatisfiable: return "qoc-unsatisfiable";
    case Errc::insufficient_resources: return "insufficient-resources";
    case Errc::unknown_id: return "unknown-id";
    case Errc::duplicate_id: return "duplicate-id";
    case Errc::invalid_offer: return "invalid-offer";
    case Errc::unexpected_message: return "unexpected-message";
    case Errc::unbalanced_endif: return "unbalanced-endif";
    case Errc::unterminated_if: return "unterminated-if";
    case Errc::else_without_if: return "else-without-if";
    case Errc::malformed_directive: return "malformed-directive";
  }
  return "unknown";
}

inline bool errc_from_string(std::string_view text, Errc& out) noexcept {
  for (int i = 0; i <= static_cast<int>(Errc::malformed_directive); ++i) {
    auto code = static_cast<Errc>(i);
    if (to_string(code) == text) {
      out = code;
      return true;
    }
  }
  return false;
}

/// Categories of feature-model invariant violations reported by validate_model.
enum class ModelErrorCategory {
  duplicate_name,
  undersized_group,
  dangling_constraint,
  bad_attribute_range,
  bad_name,
  bad_property_value,
};

inline constexpr std::string_view to_string(ModelErrorCategory c) noexcept {
  switch (c) {
    case ModelErrorCategory::duplicate_name: return "duplicate-name";
    case ModelErrorCategory::undersized_group: return "undersized-group";
    case ModelErrorCategory::dangling_constraint: return "dangling-constraint";
    case ModelErrorCategory::bad_attribute_range: return "bad-attribute-range";
    case ModelErrorCategory::bad_name: return "bad-name";
    case ModelErrorCategory::bad_property_value: return "bad-property-value";
  }
  return "unknown";
}

struct ModelError {
  ModelErrorCategory category;
  std::string feature;
  std::string message;

  bool operator==(const ModelError&) const = default;
};

/// The single exception type thrown across the library. `code()` names the
/// category; `line()` is non-zero for errors tied to a source line.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail, std::size_t line = 0)
      : std::runtime_error(compose(code, detail, line)), code_(code), line_(line) {}

  Error(Errc code, const std::string& detail, std::vector<ModelError> model_errors)
      : std::runtime_error(compose(code, detail, 0)),
        code_(code),
        model_errors_(std::move(model_errors)) {}

  Errc code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  const std::vector<ModelError>& model_errors() const noexcept { return model_errors_; }

 private:
  static std::string compose(Errc code, const std::string& detail, std::size_t line) {
    std::string msg(to_string(code));
    if (line != 0) msg += " (line " + std::to_string(line) + ")";
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  Errc code_;
  std::size_t line_ = 0;
  std::vector<ModelError> model_errors_;
};

}  // namespace cafm

#endif  // CAFM_ERROR_HPP
