#ifndef CAFM_FEATURE_MODEL_HPP
#define CAFM_FEATURE_MODEL_HPP

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cafm/rational.hpp"

namespace cafm {

enum class Variability { mandatory, optional };

/// How a parent constrains its children. A parent has exactly one group kind;
/// only children of an `and` group carry their own mandatory/optional flag.
enum class GroupKind { and_group, alternative, or_group };

enum class PropertyType { string, number, boolean };

inline constexpr std::string_view to_string(GroupKind g) noexcept {
  switch (g) {
    case GroupKind::and_group: return "and";
    case GroupKind::alternative: return "alternative";
    case GroupKind::or_group: return "or";
  }
  return "and";
}

inline constexpr std::string_view to_string(PropertyType t) noexcept {
  switch (t) {
    case PropertyType::string: return "string";
    case PropertyType::number: return "number";
    case PropertyType::boolean: return "boolean";
  }
  return "string";
}

inline std::optional<GroupKind> group_from_string(std::string_view s) {
  if (s == "and") return GroupKind::and_group;
  if (s == "alternative") return GroupKind::alternative;
  if (s == "or") return GroupKind::or_group;
  return std::nullopt;
}

inline std::optional<PropertyType> property_type_from_string(std::string_view s) {
  if (s == "string") return PropertyType::string;
  if (s == "number") return PropertyType::number;
  if (s == "boolean") return PropertyType::boolean;
  return std::nullopt;
}

/// Qualitative `<name, type, value>` data attached to a feature.
struct PropertyTriple {
  std::string name;
  PropertyType type = PropertyType::string;
  std::string value;

  /// True when `value` is well-formed for `type`.
  bool well_typed() const {
    switch (type) {
      case PropertyType::string: return true;
      case PropertyType::number: return parse_rational(value).has_value();
      case PropertyType::boolean: return value == "true" || value == "false";
    }
    return false;
  }

  auto operator<=>(const PropertyTriple&) const = default;
};

struct Feature {
  std::string name;
  Variability variability = Variability::optional;
  GroupKind group = GroupKind::and_group;
  std::vector<Feature> children;
  std::map<std::string, Rational> attributes;
  std::vector<PropertyTriple> properties;

  bool is_mandatory() const noexcept { return variability == Variability::mandatory; }

  std::optional<Rational> attribute(const std::string& key) const {
    auto it = attributes.find(key);
    if (it == attributes.end()) return std::nullopt;
    return it->second;
  }

  Feature& with_attribute(std::string key, Rational value) & {
    attributes[std::move(key)] = value;
    return *this;
  }
  Feature&& with_attribute(std::string key, Rational value) && {
    attributes[std::move(key)] = value;
    return std::move(*this);
  }
  Feature&& with_property(std::string key, PropertyType type, std::string value) && {
    properties.push_back({std::move(key), type, std::move(value)});
    return std::move(*this);
  }

  bool operator==(const Feature&) const = default;
};

enum class ConstraintKind { requires_feature, excludes_feature };

struct CrossTreeConstraint {
  ConstraintKind kind = ConstraintKind::requires_feature;
  std::string from;
  std::string to;

  bool operator==(const CrossTreeConstraint&) const = default;
};

struct FeatureModel {
  std::string name;
  Feature root;
  std::vector<CrossTreeConstraint> constraints;

  bool operator==(const FeatureModel&) const = default;
};

/// A set of selected feature names. Ordering is the canonical product order:
/// lexicographic comparison of the sorted name lists.
struct Configuration {
  std::set<std::string> selected;

  Configuration() = default;
  Configuration(std::initializer_list<std::string> names) : selected(names) {}
  explicit Configuration(std::set<std::string> names) : selected(std::move(names)) {}

  bool contains(const std::string& name) const { return selected.count(name) != 0; }
  std::size_t size() const noexcept { return selected.size(); }

  auto operator<=>(const Configuration&) const = default;
};

/// `<feature, value>`: select child `value` of parent `feature`.
struct RequirementTriple {
  std::string feature;
  std::string value;

  auto operator<=>(const RequirementTriple&) const = default;
};

// Builders used by fixtures and tests.

inline Feature mandatory(std::string name, std::vector<Feature> children = {},
                         GroupKind group = GroupKind::and_group) {
  return Feature{std::move(name), Variability::mandatory, group, std::move(children), {}, {}};
}

inline Feature optional(std::string name, std::vector<Feature> children = {},
                        GroupKind group = GroupKind::and_group) {
  return Feature{std::move(name), Variability::optional, group, std::move(children), {}, {}};
}

/// A member of an alternative/or group (carries no variability of its own).
inline Feature member(std::string name, std::vector<Feature> children = {},
                      GroupKind group = GroupKind::and_group) {
  return optional(std::move(name), std::move(children), group);
}

/// Pre-order walk; `fn(feature, parent_or_null)`.
template <typename Fn>
void for_each_feature(const Feature& root, Fn&& fn, const Feature* parent = nullptr) {
  fn(root, parent);
  for (const auto& child : root.children) for_each_feature(child, fn, &root);
}

inline const Feature* find_feature(const Feature& root, std::string_view name) {
  if (root.name == name) return &root;
  for (const auto& child : root.children) {
    if (const Feature* hit = find_feature(child, name)) return hit;
  }
  return nullptr;
}

inline Feature* find_feature(Feature& root, std::string_view name) {
  return const_cast<Feature*>(find_feature(std::as_const(root), name));
}

inline std::size_t feature_count(const Feature& root) {
  std::size_t n = 0;
  for_each_feature(root, [&](const Feature&, const Feature*) { ++n; });
  return n;
}

}  // namespace cafm

#endif  // CAFM_FEATURE_MODEL_HPP
