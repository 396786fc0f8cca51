#ifndef CAFM_ANALYSIS_HPP
#define CAFM_ANALYSIS_HPP

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"

namespace cafm {

/// Exhaustive operations refuse models larger than this.
inline constexpr std::size_t kMaxEnumerableFeatures = 24;

/// Bounded completion search works on 64-bit selection masks.
inline constexpr std::size_t kMaxSearchFeatures = 64;

inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = static_cast<unsigned char>(s.front());
  if (!(std::isalpha(head) || head == '_')) return false;
  return std::all_of(s.begin(), s.end(), [](char ch) {
    auto c = static_cast<unsigned char>(ch);
    return std::isalnum(c) || c == '_' || c == '-' || c == '.';
  });
}

/// Returns every invariant violation of `fm`; empty means well-formed.
inline std::vector<ModelError> validate_model(const FeatureModel& fm) {
  std::vector<ModelError> errors;
  std::map<std::string, int> seen;

  for_each_feature(fm.root, [&](const Feature& f, const Feature*) {
    if (!is_identifier(f.name)) {
      errors.push_back({ModelErrorCategory::bad_name, f.name, "feature name is not an identifier"});
    }
    if (++seen[f.name] == 2) {
      errors.push_back({ModelErrorCategory::duplicate_name, f.name, "feature name is not unique"});
    }
    if (f.group != GroupKind::and_group && f.children.size() < 2) {
      errors.push_back({ModelErrorCategory::undersized_group, f.name,
                        std::string(to_string(f.group)) + " group needs at least 2 children"});
    }
    if (auto q = f.attribute("min_qoc"); q && (*q < 0 || *q > 1)) {
      errors.push_back({ModelErrorCategory::bad_attribute_range, f.name, "min_qoc outside [0, 1]"});
    }
    for (const auto& p : f.properties) {
      if (!is_identifier(p.name)) {
        errors.push_back({ModelErrorCategory::bad_name, f.name, "property name '" + p.name + "'"});
      }
      if (!p.well_typed()) {
        errors.push_back({ModelErrorCategory::bad_property_value, f.name,
                          "property '" + p.name + "' is not a valid " + std::string(to_string(p.type))});
      }
    }
  });

  for (const auto& c : fm.constraints) {
    if (c.from == c.to) {
      errors.push_back({ModelErrorCategory::dangling_constraint, c.from, "constraint relates a feature to itself"});
    }
    for (const auto* end : {&c.from, &c.to}) {
      if (seen.find(*end) == seen.end()) {
        errors.push_back({ModelErrorCategory::dangling_constraint, *end, "constraint endpoint does not exist"});
      }
    }
  }
  return errors;
}

namespace detail {

using Mask = std::uint64_t;

inline constexpr Mask bit(int i) { return Mask{1} << i; }

/// Pre-order flattening of a feature tree. Node 0 is the root. Holds pointers
/// into the model it was built from.
class ModelIndex {
 public:
  struct Node {
    const Feature* feature;
    int parent;
    std::vector<int> children;
  };

  explicit ModelIndex(const FeatureModel& fm) : model_(&fm) { add(fm.root, -1); }

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  const Feature& feature(int i) const { return *node(i).feature; }
  const FeatureModel& model() const noexcept { return *model_; }

  std::optional<int> find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  int require(const std::string& name, Errc code) const {
    auto id = find(name);
    if (!id) throw Error(code, "'" + name + "' is not a feature of model '" + model_->name + "'");
    return *id;
  }

  /// Mask of a node and all its descendants (valid when size() <= 64).
  Mask subtree(int i) const {
    Mask m = bit(i);
    for (int c : node(i).children) m |= subtree(c);
    return m;
  }

  Mask ancestors_and_self(int i) const {
    Mask m = 0;
    for (; i >= 0; i = node(i).parent) m |= bit(i);
    return m;
  }

  bool is_forced_child(int child) const {
    int p = node(child).parent;
    return p >= 0 && feature(p).group == GroupKind::and_group && feature(child).is_mandatory();
  }

  Mask to_mask(const Configuration& cfg) const {
    Mask m = 0;
    for (const auto& name : cfg.selected) m |= bit(require(name, Errc::unknown_feature));
    return m;
  }

  Configuration to_configuration(Mask m) const {
    Configuration cfg;
    for (; m != 0; m &= m - 1) cfg.selected.insert(feature(std::countr_zero(m)).name);
    return cfg;
  }

 private:
  int add(const Feature& f, int parent) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({&f, parent, {}});
    by_name_.emplace(f.name, id);
    for (const auto& child : f.children) {
      const int cid = add(child, id);
      nodes_[static_cast<std::size_t>(id)].children.push_back(cid);
    }
    return id;
  }

  const FeatureModel* model_;
  std::vector<Node> nodes_;
  std::unordered_map<std::string, int> by_name_;
};

inline bool satisfies_constraints(const ModelIndex& ix, Mask m) {
  for (const auto& c : ix.model().constraints) {
    const bool from = (m & bit(*ix.find(c.from))) != 0;
    const bool to = (m & bit(*ix.find(c.to))) != 0;
    if (c.kind == ConstraintKind::requires_feature && from && !to) return false;
    if (c.kind == ConstraintKind::excludes_feature && from && to) return false;
  }
  return true;
}

/// All tree-valid selections of the subtree rooted at `node` (with `node`
/// selected) that contain every bit of `required` inside that subtree.
/// Cross-tree constraints are not applied here.
inline std::vector<Mask> subtree_products(const ModelIndex& ix, int node, Mask required) {
  const Feature& f = ix.feature(node);
  const auto& kids = ix.node(node).children;
  std::vector<Mask> acc{bit(node)};

  auto extend = [&](const std::vector<Mask>& choices) {
    std::vector<Mask> next;
    next.reserve(acc.size() * choices.size());
    for (Mask a : acc)
      for (Mask c : choices) next.push_back(a | c);
    acc = std::move(next);
  };

  if (f.group == GroupKind::alternative) {
    std::vector<Mask> out;
    for (int c : kids) {
      const Mask others = required & ix.subtree(node) & ~ix.subtree(c) & ~bit(node);
      if (others != 0) continue;
      for (Mask m : subtree_products(ix, c, required)) out.push_back(bit(node) | m);
    }
    return out;
  }

  Mask child_bits = 0;
  for (int c : kids) {
    child_bits |= bit(c);
    const bool needed = (required & ix.subtree(c)) != 0 ||
                        (f.group == GroupKind::and_group && ix.feature(c).is_mandatory());
    std::vector<Mask> choices = subtree_products(ix, c, required);
    if (!needed) choices.push_back(0);
    extend(choices);
    if (acc.empty()) return acc;
  }
  if (f.group == GroupKind::or_group) {
    std::erase_if(acc, [&](Mask m) { return (m & child_bits) == 0; });
  }
  return acc;
}

/// Valid products of the whole model that are supersets of `required`,
/// unordered.
inline std::vector<Mask> product_masks(const ModelIndex& ix, Mask required) {
  std::vector<Mask> masks = subtree_products(ix, 0, required | bit(0));
  std::erase_if(masks, [&](Mask m) { return (m & required) != required || !satisfies_constraints(ix, m); });
  return masks;
}

/// Sorts masks into canonical configuration order and converts them.
inline std::vector<Configuration> canonical_configurations(const ModelIndex& ix, std::vector<Mask> masks,
                                                           std::size_t limit) {
  // Re-express each mask over name ranks so that comparing two masks becomes
  // comparing their sorted name lists.
  const auto n = static_cast<int>(ix.size());
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ix.feature(a).name < ix.feature(b).name; });
  std::vector<int> rank(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

  for (Mask& m : masks) {
    Mask ranked = 0;
    for (Mask rest = m; rest != 0; rest &= rest - 1) ranked |= bit(rank[static_cast<std::size_t>(std::countr_zero(rest))]);
    m = ranked;
  }
  auto less = [](Mask a, Mask b) {
    if (a == b) return false;
    const Mask diff = a ^ b;
    const int low = std::countr_zero(diff);
    const Mask above = ~((bit(low) << 1) - 1);
    if (a & bit(low)) return (b & above) != 0;  // a holds the smaller name unless b is a prefix of a
    return (a & above) == 0;
  };
  const std::size_t keep = std::min(limit, masks.size());
  std::partial_sort(masks.begin(), masks.begin() + static_cast<std::ptrdiff_t>(keep), masks.end(), less);

  std::vector<Configuration> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    Configuration cfg;
    for (Mask rest = masks[i]; rest != 0; rest &= rest - 1) {
      cfg.selected.insert(ix.feature(order[static_cast<std::size_t>(std::countr_zero(rest))]).name);
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

inline void require_at_most(const ModelIndex& ix, std::size_t cap) {
  if (ix.size() > cap) {
    throw Error(Errc::too_large, "model '" + ix.model().name + "' has " + std::to_string(ix.size()) +
                                     " features (limit " + std::to_string(cap) + ")");
  }
}

}  // namespace detail

/// Full validity check of `cfg` against `fm` (tree rules plus cross-tree
/// constraints). Throws unknown-feature for names absent from the model.
inline bool is_valid_configuration(const FeatureModel& fm, const Configuration& cfg) {
  detail::ModelIndex ix(fm);
  std::vector<char> on(ix.size(), 0);
  for (const auto& name : cfg.selected) on[static_cast<std::size_t>(ix.require(name, Errc::unknown_feature))] = 1;

  if (!on[0]) return false;
  for (std::size_t i = 0; i < ix.size(); ++i) {
    const auto& node = ix.node(static_cast<int>(i));
    if (!on[i]) continue;
    if (node.parent >= 0 && !on[static_cast<std::size_t>(node.parent)]) return false;

    std::size_t chosen = 0;
    for (int c : node.children) {
      if (on[static_cast<std::size_t>(c)]) {
        ++chosen;
      } else if (node.feature->group == GroupKind::and_group && ix.feature(c).is_mandatory()) {
        return false;
      }
    }
    if (node.feature->group == GroupKind::alternative && chosen != 1) return false;
    if (node.feature->group == GroupKind::or_group && chosen == 0) return false;
  }
  for (const auto& c : fm.constraints) {
    const bool from = on[static_cast<std::size_t>(ix.require(c.from, Errc::unknown_feature))] != 0;
    const bool to = on[static_cast<std::size_t>(ix.require(c.to, Errc::unknown_feature))] != 0;
    if (c.kind == ConstraintKind::requires_feature && from && !to) return false;
    if (c.kind == ConstraintKind::excludes_feature && from && to) return false;
  }
  return true;
}

struct ProductList {
  std::vector<Configuration> products;
  /// Set when more than `limit` products exist; `products` then holds the
  /// first `limit` in canonical order.
  bool truncated = false;
};

/// Every valid configuration of `fm` in canonical order, at most `limit`.
inline ProductList enumerate_products(const FeatureModel& fm, std::size_t limit) {
  if (limit == 0) throw Error(Errc::invalid_argument, "limit must be positive");
  detail::ModelIndex ix(fm);
  detail::require_at_most(ix, kMaxEnumerableFeatures);
  auto masks = detail::product_masks(ix, 0);
  ProductList out;
  out.truncated = masks.size() > limit;
  out.products = detail::canonical_configurations(ix, std::move(masks), limit);
  return out;
}

inline std::uint64_t count_products(const FeatureModel& fm) {
  detail::ModelIndex ix(fm);
  detail::require_at_most(ix, kMaxEnumerableFeatures);
  return detail::product_masks(ix, 0).size();
}

/// Partial selection satisfying each `<feature, value>` triple: the named
/// child, its parent, and all ancestors up to the root.
inline Configuration resolve_requirements(const FeatureModel& fm, const std::vector<RequirementTriple>& reqs) {
  detail::ModelIndex ix(fm);
  Configuration out{fm.root.name};
  for (const auto& req : reqs) {
    const int parent = ix.require(req.feature, Errc::no_such_feature);
    const auto& kids = ix.node(parent).children;
    auto hit = std::find_if(kids.begin(), kids.end(), [&](int c) { return ix.feature(c).name == req.value; });
    if (hit == kids.end()) {
      throw Error(Errc::no_such_value, "'" + req.feature + "' has no child '" + req.value + "'");
    }
    for (int i = *hit; i >= 0; i = ix.node(i).parent) out.selected.insert(ix.feature(i).name);
  }
  return out;
}

/// Every valid configuration containing `partial`, canonical order. Empty
/// when `partial` cannot be completed.
inline std::vector<Configuration> complete_configuration(const FeatureModel& fm, const Configuration& partial) {
  using detail::bit;
  using detail::Mask;
  detail::ModelIndex ix(fm);
  detail::require_at_most(ix, kMaxSearchFeatures);

  // Propagate forced selections to a fixpoint before searching.
  Mask sel = ix.to_mask(partial) | bit(0);
  for (Mask prev = ~sel; prev != sel;) {
    prev = sel;
    for (Mask rest = sel; rest != 0; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      sel |= ix.ancestors_and_self(i);
      for (int c : ix.node(i).children) {
        if (ix.is_forced_child(c)) sel |= bit(c);
      }
    }
    for (const auto& c : fm.constraints) {
      if (c.kind == ConstraintKind::requires_feature && (sel & bit(*ix.find(c.from)))) sel |= bit(*ix.find(c.to));
    }
  }
  for (const auto& c : fm.constraints) {
    if (c.kind == ConstraintKind::excludes_feature && (sel & bit(*ix.find(c.from))) && (sel & bit(*ix.find(c.to)))) {
      return {};
    }
  }
  for (std::size_t i = 0; i < ix.size(); ++i) {
    const auto& node = ix.node(static_cast<int>(i));
    if (node.feature->group != GroupKind::alternative) continue;
    const auto picked = std::count_if(node.children.begin(), node.children.end(), [&](int c) { return (sel & bit(c)) != 0; });
    if (picked > 1) return {};
  }

  auto masks = detail::product_masks(ix, sel);
  const std::size_t n = masks.size();
  return detail::canonical_configurations(ix, std::move(masks), n);
}

}  // namespace cafm

#endif  // CAFM_ANALYSIS_HPP
