#ifndef CAFM_CSCAFM_HPP
#define CAFM_CSCAFM_HPP

// Context-aware service derivation: annotate each service feature model with
// the minimum QoC its mandatory context information demands, gate offers on
// QoC, and select the cheapest valid configuration honouring the consumer's
// requirements and sensed context.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "cafm/analysis.hpp"
#include "cafm/context.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"
#include "cafm/fm_xml.hpp"
#include "cafm/rational.hpp"

namespace cafm {

using ResourceMap = std::map<std::string, Rational>;

inline constexpr std::array<const char*, 3> kResourceKeys{"ram_gb", "storage_gb", "power_units"};

namespace attr {
inline const std::string cost = "cost";
inline const std::string response_time = "response_time";
inline const std::string min_qoc = "min_qoc";
inline const std::string qos_level = "qos_level";
inline const std::string qoc_capacity = "qoc_capacity";
}  // namespace attr

/// A provider's service: its feature model plus an optional product
/// descriptor template (pointcuts/bindings per feature). Offer-level
/// attributes live on the model root; cost and resources are per feature.
struct ServiceOffer {
  std::string service_id;
  std::string provider_id;
  FeatureModel model;
  ProductDescriptor descriptor;

  Rational qos_level() const { return model.root.attribute(attr::qos_level).value_or(Rational(0)); }
  Rational qoc_capacity() const { return model.root.attribute(attr::qoc_capacity).value_or(Rational(0)); }
  Rational response_time() const { return model.root.attribute(attr::response_time).value_or(Rational(0)); }

  bool operator==(const ServiceOffer&) const = default;
};

/// Problems that make an offer unusable; empty means valid.
inline std::vector<std::string> validate_offer(const ServiceOffer& offer) {
  std::vector<std::string> problems;
  if (!is_identifier(offer.service_id)) problems.push_back("service id '" + offer.service_id + "' is not an identifier");
  if (!is_identifier(offer.provider_id)) problems.push_back("provider id '" + offer.provider_id + "' is not an identifier");
  for (const auto& e : validate_model(offer.model)) {
    problems.push_back(std::string(to_string(e.category)) + " at '" + e.feature + "': " + e.message);
  }
  for_each_feature(offer.model.root, [&](const Feature& f, const Feature*) {
    for (const auto& key : {attr::cost, attr::response_time}) {
      if (auto v = f.attribute(key); v && *v < 0) problems.push_back(f.name + "." + key + " is negative");
    }
    for (const char* key : kResourceKeys) {
      if (auto v = f.attribute(key); v && *v < 0) problems.push_back(f.name + "." + key + " is negative");
    }
  });
  if (offer.qos_level() < 0 || offer.qos_level() > 1) problems.push_back("qos_level outside [0, 1]");
  if (offer.qoc_capacity() < 0) problems.push_back("qoc_capacity is negative");
  for (const auto& entry : offer.descriptor.features) {
    if (!find_feature(offer.model.root, entry.name)) {
      problems.push_back("descriptor entry '" + entry.name + "' is not a feature of the offer");
    }
  }
  return problems;
}

/// Service feature annotated with the QoC its mandatory context demands.
struct AnnotatedFeature {
  std::string name;
  Rational required_qoc{0};
  std::vector<AnnotatedFeature> children;

  bool operator==(const AnnotatedFeature&) const = default;
};

inline Rational calculate_min_qoc_required(const Feature& f) {
  return f.attribute(attr::min_qoc).value_or(Rational(0));
}

/// Bottom-up: required_qoc(f) = sum over mandatory children c of
/// (min_qoc(c) + required_qoc(c)). Optional and group members add nothing.
inline AnnotatedFeature aggregate_required_qoc(const Feature& f) {
  AnnotatedFeature out{f.name, Rational(0), {}};
  out.children.reserve(f.children.size());
  for (const auto& child : f.children) {
    out.children.push_back(aggregate_required_qoc(child));
    if (f.group == GroupKind::and_group && child.is_mandatory()) {
      out.required_qoc += calculate_min_qoc_required(child) + out.children.back().required_qoc;
    }
  }
  return out;
}

struct DerivationResult {
  Configuration configuration;
  std::string service_id;
  std::string provider_id;
  Rational total_cost{0};
  Rational achieved_qoc{0};
  std::vector<PropertyTriple> bound_properties;

  bool operator==(const DerivationResult&) const = default;
};

inline Rational total_cost(const FeatureModel& fm, const Configuration& cfg) {
  Rational sum(0);
  for_each_feature(fm.root, [&](const Feature& f, const Feature*) {
    if (cfg.contains(f.name)) sum += f.attribute(attr::cost).value_or(Rational(0));
  });
  return sum;
}

/// Per-key sum of resource attributes over the selected features.
inline ResourceMap resource_demand(const ServiceOffer& offer, const Configuration& cfg) {
  ResourceMap demand;
  for_each_feature(offer.model.root, [&](const Feature& f, const Feature*) {
    if (!cfg.contains(f.name)) return;
    for (const char* key : kResourceKeys) {
      if (auto v = f.attribute(key)) demand[key] += *v;
    }
  });
  return demand;
}

/// Keys absent from `available` are unlimited.
inline bool check_resources(const ServiceOffer& offer, const Configuration& cfg, const ResourceMap& available) {
  for (const auto& [key, need] : resource_demand(offer, cfg)) {
    auto it = available.find(key);
    if (it != available.end() && need > it->second) return false;
  }
  return true;
}

/// Largest required QoC over the annotated children of the service root.
inline Rational required_offer_qoc(const ServiceOffer& offer) {
  Rational need(0);
  for (const auto& child : offer.model.root.children) need = std::max(need, aggregate_required_qoc(child).required_qoc);
  return need;
}

/// Descriptor covering every selected feature in model order, with the
/// offer's pointcuts and bindings where it declares them.
inline ProductDescriptor make_product_descriptor(const ServiceOffer& offer, const Configuration& cfg) {
  ProductDescriptor pd;
  for_each_feature(offer.model.root, [&](const Feature& f, const Feature*) {
    if (!cfg.contains(f.name)) return;
    if (const auto* entry = offer.descriptor.find(f.name)) {
      pd.features.push_back(*entry);
    } else {
      pd.features.push_back({f.name, {}, {}});
    }
  });
  return pd;
}

namespace detail {

/// Turns context observations into requirement triples on `fm`: an observed
/// feature present in `fm` with the observed value somewhere below it binds
/// that value under its own parent. Observations that do not apply are
/// dropped; features already constrained by `explicit_reqs` are skipped.
inline std::vector<RequirementTriple> context_triples(const FeatureModel& fm,
                                                      const std::vector<ContextObservation>& observations,
                                                      const std::vector<RequirementTriple>& explicit_reqs) {
  ModelIndex ix(fm);
  std::set<std::string> taken;
  for (const auto& r : explicit_reqs) taken.insert(r.feature);
  std::vector<RequirementTriple> out;
  for (const auto& obs : observations) {
    auto at = ix.find(obs.feature);
    if (!at) continue;
    auto target = find_below(ix, *at, obs.value);
    if (!target) continue;
    const std::string& parent = ix.feature(ix.node(*target).parent).name;
    if (taken.count(parent) || taken.count(obs.feature)) continue;
    RequirementTriple t{parent, obs.value};
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  return out;
}

}  // namespace detail

/// Candidate configurations of one offer for the given requirements; empty
/// when the offer cannot satisfy them.
inline std::vector<Configuration> offer_candidates(const ServiceOffer& offer,
                                                   const std::vector<ContextObservation>& observations,
                                                   const std::vector<RequirementTriple>& reqs) {
  std::vector<RequirementTriple> triples = reqs;
  auto ctx = detail::context_triples(offer.model, observations, reqs);
  triples.insert(triples.end(), ctx.begin(), ctx.end());
  Configuration partial;
  try {
    partial = resolve_requirements(offer.model, triples);
  } catch (const Error& e) {
    if (e.code() == Errc::no_such_feature || e.code() == Errc::no_such_value) return {};
    throw;
  }
  return complete_configuration(offer.model, partial);
}

/// Selects the minimum-cost (offer, configuration) pair. Ties go to the
/// canonically smaller configuration, then the smaller service id.
///
/// Throws no-matching-service when no offer can satisfy the requirements and
/// qoc-unsatisfiable when some can but all fail the QoC gate. Errors from
/// context detection propagate unchanged.
inline DerivationResult derive(const FeatureModel& context_model, const std::vector<ContextObservation>& observations,
                               const std::vector<ServiceOffer>& offers, const std::vector<RequirementTriple>& reqs,
                               const Rational& qoc_threshold) {
  if (offers.empty()) throw Error(Errc::no_matching_service, "no offers registered");
  // Rejects unknown or contradictory observations before any offer is scored.
  detect_consumer_context(context_model, observations);

  struct Best {
    Rational cost;
    Configuration cfg;
    const ServiceOffer* offer;
  };
  std::optional<Best> best;
  bool matched = false;

  for (const auto& offer : offers) {
    std::vector<AnnotatedFeature> annotated;
    for (const auto& child : offer.model.root.children) annotated.push_back(aggregate_required_qoc(child));
    Rational required(0);
    for (const auto& a : annotated) required = std::max(required, a.required_qoc);
    const bool qoc_ok = offer.qoc_capacity() >= required && offer.qoc_capacity() >= qoc_threshold;

    auto candidates = offer_candidates(offer, observations, reqs);
    if (candidates.empty()) continue;
    matched = true;
    if (!qoc_ok) continue;

    for (auto& cfg : candidates) {
      Rational cost = total_cost(offer.model, cfg);
      const bool better = !best || std::tie(cost, cfg, offer.service_id) <
                                       std::tie(best->cost, best->cfg, best->offer->service_id);
      if (better) best = Best{cost, std::move(cfg), &offer};
    }
  }

  if (!best) {
    if (matched) throw Error(Errc::qoc_unsatisfiable, "every matching offer fails the QoC requirement");
    throw Error(Errc::no_matching_service, "no offer satisfies the requirements");
  }

  DerivationResult result;
  result.service_id = best->offer->service_id;
  result.provider_id = best->offer->provider_id;
  result.total_cost = best->cost;
  result.achieved_qoc = best->offer->qoc_capacity();
  for_each_feature(best->offer->model.root, [&](const Feature& f, const Feature*) {
    if (!best->cfg.contains(f.name)) return;
    result.bound_properties.insert(result.bound_properties.end(), f.properties.begin(), f.properties.end());
  });
  result.configuration = std::move(best->cfg);
  return result;
}

}  // namespace cafm

#endif  // CAFM_CSCAFM_HPP
