#ifndef CAFM_CONTEXT_HPP
#define CAFM_CONTEXT_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cafm/analysis.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"
#include "cafm/rational.hpp"

namespace cafm {

/// Consumer situation at invocation time (who/where/when/what/why plus
/// device, preferences and security mechanism).
struct ContextSnapshot {
  std::string who;
  std::string where;
  std::int64_t when = 0;  // seconds since epoch
  std::string what;
  std::string why;
  std::string device;
  std::vector<PropertyTriple> preferences;
  std::string security;

  bool operator==(const ContextSnapshot&) const = default;
};

/// Quality of a context datum; every dimension normalized to [0, 1].
struct QoCMetrics {
  Rational precision{1};
  Rational probability_of_correctness{1};
  Rational trustworthiness{1};
  Rational resolution{1};
  Rational up_to_dateness{1};  // 1 = just sensed

  bool in_range() const {
    for (const Rational* r : {&precision, &probability_of_correctness, &trustworthiness, &resolution, &up_to_dateness}) {
      if (*r < 0 || *r > 1) return false;
    }
    return true;
  }

  bool operator==(const QoCMetrics&) const = default;
};

/// One sensed fact: context feature `feature` currently has value `value`.
struct ContextObservation {
  std::string feature;
  std::string value;
  QoCMetrics qoc;

  bool operator==(const ContextObservation&) const = default;
};

/// Conservative scalarization: the weakest quality dimension.
inline Rational scalar_qoc(const QoCMetrics& m) {
  return std::min({m.precision, m.probability_of_correctness, m.trustworthiness, m.resolution, m.up_to_dateness});
}

inline std::vector<ContextObservation> snapshot_to_observations(const ContextSnapshot& s, const QoCMetrics& qoc) {
  std::vector<ContextObservation> out;
  if (!s.where.empty()) out.push_back({"Geolocation", s.where, qoc});
  if (!s.security.empty()) out.push_back({"Security", s.security, qoc});
  if (!s.device.empty()) out.push_back({"MobileDevice", s.device, qoc});
  for (const auto& pref : s.preferences) out.push_back({pref.name, pref.value, qoc});
  return out;
}

struct DetectedContext {
  Configuration configuration;
  std::vector<std::string> visit_order;
};

namespace detail {

/// Pre-order search below `from` (excluding `from`) for a feature named `name`.
inline std::optional<int> find_below(const ModelIndex& ix, int from, const std::string& name) {
  for (int c : ix.node(from).children) {
    if (ix.feature(c).name == name) return c;
  }
  for (int c : ix.node(from).children) {
    if (auto hit = find_below(ix, c, name)) return hit;
  }
  return std::nullopt;
}

}  // namespace detail

/// Walks the consumer context model depth-first in pre-order from the root.
/// At a node named by an observation, the observed value (a child, or a
/// deeper descendant reached through intermediate features) is selected;
/// mandatory children of selected nodes are selected as the walk proceeds.
///
/// Throws contradictory-observations when one feature is bound to two values
/// and unknown-feature when a feature or value does not exist in `fm`.
inline DetectedContext detect_consumer_context(const FeatureModel& fm,
                                               const std::vector<ContextObservation>& observations) {
  detail::ModelIndex ix(fm);
  std::map<int, int> bound;  // observed node -> selected descendant
  for (const auto& obs : observations) {
    const int at = ix.require(obs.feature, Errc::unknown_feature);
    auto target = detail::find_below(ix, at, obs.value);
    if (!target) {
      throw Error(Errc::unknown_feature, "'" + obs.feature + "' has no value '" + obs.value + "'");
    }
    auto [it, inserted] = bound.emplace(at, *target);
    if (!inserted && it->second != *target) {
      throw Error(Errc::contradictory_observations, "'" + obs.feature + "' observed as both '" +
                                                        ix.feature(it->second).name + "' and '" + obs.value + "'");
    }
  }

  std::vector<char> on(ix.size(), 0);
  on[0] = 1;
  // Observed features live wherever the observation says; their ancestors are
  // in effect before the walk starts so closure below them is complete.
  for (const auto& [at, _] : bound) {
    for (int i = at; i >= 0; i = ix.node(i).parent) on[static_cast<std::size_t>(i)] = 1;
  }

  DetectedContext out;
  out.visit_order.reserve(ix.size());
  for (std::size_t i = 0; i < ix.size(); ++i) {  // index order is pre-order
    const int id = static_cast<int>(i);
    out.visit_order.push_back(ix.feature(id).name);
    if (!on[i]) continue;
    if (auto hit = bound.find(id); hit != bound.end()) {
      for (int j = hit->second; j != id; j = ix.node(j).parent) on[static_cast<std::size_t>(j)] = 1;
    }
    for (int c : ix.node(id).children) {
      if (ix.is_forced_child(c)) on[static_cast<std::size_t>(c)] = 1;
    }
  }
  for (std::size_t i = 0; i < ix.size(); ++i) {
    if (on[i]) out.configuration.selected.insert(ix.feature(static_cast<int>(i)).name);
  }
  return out;
}

}  // namespace cafm

#endif  // CAFM_CONTEXT_HPP
