#ifndef CAFM_BROKER_HPP
#define CAFM_BROKER_HPP

// The broker as a pure message-driven state machine. Every transition takes a
// state value and one message and returns the next state plus the messages the
// broker emits. Errors never abort a transition; they become ErrorReply
// messages.
//
// Request flow (consumer -> broker):
//   GetContextAwareService  -> ReserveResources (to provider)
//                              SendContextAwareService (to consumer)
//                           or ErrorReply
//   FindServiceContext      -> ServiceContextReply | ErrorReply
//   NotifyQoSChange         -> NotifyQoSChange forwarded to each affected
//                              consumer, then re-derivation outputs
//   NotifyQoCChange         -> NotifyQoCChange echoed to the consumer, then
//                              re-derivation outputs
//   ReleaseResources        -> ReleaseResources (to provider) | ErrorReply

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cafm/analysis.hpp"
#include "cafm/context.hpp"
#include "cafm/cscafm.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"
#include "cafm/fm_xml.hpp"

namespace cafm::broker {

inline const std::string kBrokerId = "broker";

struct GetContextAwareService {
  std::string request_id;
  std::vector<RequirementTriple> requirements;
  ContextSnapshot context;
  QoCMetrics qoc;
  Rational qoc_threshold{0};

  bool operator==(const GetContextAwareService&) const = default;
};

struct FindServiceContext {
  std::string service_id;

  bool operator==(const FindServiceContext&) const = default;
};

struct ServiceContextReply {
  std::string service_id;
  std::string provider_id;
  std::map<std::string, Rational> attributes;

  bool operator==(const ServiceContextReply&) const = default;
};

/// Attribute updates for one service. Keys are `Feature.attribute`, or a bare
/// `attribute` for the service root.
struct NotifyQoSChange {
  std::string service_id;
  std::map<std::string, Rational> attributes;

  bool operator==(const NotifyQoSChange&) const = default;
};

struct NotifyQoCChange {
  std::vector<ContextObservation> observations;

  bool operator==(const NotifyQoCChange&) const = default;
};

struct SendContextAwareService {
  std::string request_id;
  DerivationResult result;
  ProductDescriptor product;

  bool operator==(const SendContextAwareService&) const = default;
};

struct ErrorReply {
  std::string request_id;  // may be empty
  Errc error = Errc::invalid_argument;
  std::string detail;

  bool operator==(const ErrorReply&) const = default;
};

struct ReserveResources {
  std::string request_id;
  std::string provider_id;
  ResourceMap demand;

  bool operator==(const ReserveResources&) const = default;
};

struct ReleaseResources {
  std::string request_id;
  std::string provider_id;  // set on the broker's notice to the provider

  bool operator==(const ReleaseResources&) const = default;
};

using Payload = std::variant<GetContextAwareService, FindServiceContext, ServiceContextReply, NotifyQoSChange,
                             NotifyQoCChange, SendContextAwareService, ErrorReply, ReserveResources, ReleaseResources>;

enum class MessageKind {
  GetContextAwareService,
  FindServiceContext,
  ServiceContextReply,
  NotifyQoSChange,
  NotifyQoCChange,
  SendContextAwareService,
  ErrorReply,
  ReserveResources,
  ReleaseResources,
};

inline constexpr std::string_view kKindNames[] = {
    "GetContextAwareService", "FindServiceContext", "ServiceContextReply",
    "NotifyQoSChange",        "NotifyQoCChange",    "SendContextAwareService",
    "ErrorReply",             "ReserveResources",   "ReleaseResources",
};

inline constexpr std::string_view to_string(MessageKind k) { return kKindNames[static_cast<std::size_t>(k)]; }

/// The kind is carried by the payload alternative, so kind and payload always
/// agree. `recipient` is empty for messages addressed to the broker.
struct Message {
  std::string sender;
  std::string recipient;
  Payload payload;

  MessageKind kind() const { return static_cast<MessageKind>(payload.index()); }

  bool operator==(const Message&) const = default;
};

struct RegistryEntry {
  std::string request_id;
  std::string consumer_id;
  DerivationResult result;
  std::uint64_t timestamp = 0;  // logical clock

  bool operator==(const RegistryEntry&) const = default;
};

struct Reservation {
  std::string provider_id;
  ResourceMap demand;

  bool operator==(const Reservation&) const = default;
};

/// A served request that stays live until released.
struct PendingRequest {
  std::string consumer_id;
  GetContextAwareService request;
  std::vector<ContextObservation> observations;
  DerivationResult current;

  bool operator==(const PendingRequest&) const = default;
};

struct State {
  FeatureModel context_model{"ConsumerContext", mandatory("ConsumerContext"), {}};
  std::map<std::string, std::vector<ServiceOffer>> providers;
  std::map<std::string, ResourceMap> capacity;  // registered totals
  std::vector<RegistryEntry> registry;           // append-only
  std::map<std::string, Reservation> reservations;
  std::map<std::string, PendingRequest> pending;
  std::uint64_t logical_clock = 0;

  /// Capacity left after live reservations; keys absent from the registered
  /// capacity are unlimited and do not appear.
  ResourceMap remaining(const std::string& provider_id) const {
    auto it = capacity.find(provider_id);
    if (it == capacity.end()) return {};
    ResourceMap left = it->second;
    for (const auto& [_, r] : reservations) {
      if (r.provider_id != provider_id) continue;
      for (const auto& [key, amount] : r.demand) {
        if (auto slot = left.find(key); slot != left.end()) slot->second -= amount;
      }
    }
    return left;
  }

  std::vector<ServiceOffer> all_offers() const {
    std::vector<ServiceOffer> out;
    for (const auto& [_, offers] : providers) out.insert(out.end(), offers.begin(), offers.end());
    return out;
  }

  const ServiceOffer* find_offer(const std::string& service_id) const {
    for (const auto& [_, offers] : providers) {
      for (const auto& o : offers) {
        if (o.service_id == service_id) return &o;
      }
    }
    return nullptr;
  }

  bool operator==(const State&) const = default;
};

/// Adds or replaces a provider's offers and capacity. Throws invalid-offer
/// and leaves nothing changed if any offer is malformed.
inline State register_provider(State state, const std::string& provider_id, std::vector<ServiceOffer> offers,
                               ResourceMap capacity) {
  if (!is_identifier(provider_id)) throw Error(Errc::invalid_offer, "provider id '" + provider_id + "'");
  for (auto& offer : offers) {
    offer.provider_id = provider_id;
    if (auto problems = validate_offer(offer); !problems.empty()) {
      throw Error(Errc::invalid_offer, "offer '" + offer.service_id + "': " + problems.front());
    }
    for (const auto& [other_provider, others] : state.providers) {
      if (other_provider == provider_id) continue;
      for (const auto& o : others) {
        if (o.service_id == offer.service_id) {
          throw Error(Errc::invalid_offer, "service id '" + offer.service_id + "' already offered by '" +
                                               other_provider + "'");
        }
      }
    }
  }
  for (std::size_t i = 0; i < offers.size(); ++i) {
    for (std::size_t j = i + 1; j < offers.size(); ++j) {
      if (offers[i].service_id == offers[j].service_id) {
        throw Error(Errc::invalid_offer, "duplicate service id '" + offers[i].service_id + "'");
      }
    }
  }
  for (const auto& [key, amount] : capacity) {
    if (amount < 0) throw Error(Errc::invalid_offer, "negative capacity for '" + key + "'");
  }
  state.providers[provider_id] = std::move(offers);
  state.capacity[provider_id] = std::move(capacity);
  return state;
}

struct Transition {
  State state;
  std::vector<Message> outputs;
};

namespace detail {

inline Message error_to(const std::string& recipient, std::string request_id, Errc code, std::string detail) {
  return Message{kBrokerId, recipient, ErrorReply{std::move(request_id), code, std::move(detail)}};
}

inline bool same_winner(const DerivationResult& a, const DerivationResult& b) {
  return a.service_id == b.service_id && a.configuration == b.configuration;
}

/// Derives and books resources for one request. On success the reservation
/// is recorded and the offer used is returned through `result`.
inline std::optional<ErrorReply> serve(State& state, const std::string& request_id,
                                       const PendingRequest& request, DerivationResult& result) {
  try {
    result = derive(state.context_model, request.observations, state.all_offers(), request.request.requirements,
                    request.request.qoc_threshold);
  } catch (const Error& e) {
    return ErrorReply{request_id, e.code(), e.what()};
  }
  const ServiceOffer* offer = state.find_offer(result.service_id);
  if (!check_resources(*offer, result.configuration, state.remaining(offer->provider_id))) {
    return ErrorReply{request_id, Errc::insufficient_resources,
                      "provider '" + offer->provider_id + "' cannot host the derived configuration"};
  }
  state.reservations[request_id] = Reservation{offer->provider_id, resource_demand(*offer, result.configuration)};
  return std::nullopt;
}

inline void deliver(State& state, const std::string& request_id, const PendingRequest& request,
                    std::vector<Message>& out) {
  const auto& res = state.reservations.at(request_id);
  out.push_back(Message{kBrokerId, res.provider_id, ReserveResources{request_id, res.provider_id, res.demand}});
  state.registry.push_back({request_id, request.consumer_id, request.current, state.logical_clock});
  const ServiceOffer* offer = state.find_offer(request.current.service_id);
  out.push_back(Message{kBrokerId, request.consumer_id,
                        SendContextAwareService{request_id, request.current,
                                                make_product_descriptor(*offer, request.current.configuration)}});
}

/// Re-derives a live request after its inputs changed. A changed winning
/// (service, configuration) is released, re-booked and delivered afresh; a
/// changed demand alone is released and re-booked; otherwise nothing is
/// emitted. A failed re-derivation releases and drops the request.
inline void rederive(State& state, const std::string& request_id, std::vector<Message>& out) {
  PendingRequest request = state.pending.at(request_id);
  std::optional<Reservation> old;
  if (auto it = state.reservations.find(request_id); it != state.reservations.end()) {
    old = it->second;
    state.reservations.erase(it);
  }
  auto release_old = [&] {
    if (old) out.push_back(Message{kBrokerId, old->provider_id, ReleaseResources{request_id, old->provider_id}});
  };
  DerivationResult fresh;
  if (auto err = serve(state, request_id, request, fresh)) {
    state.pending.erase(request_id);
    release_old();
    out.push_back(Message{kBrokerId, request.consumer_id, std::move(*err)});
    return;
  }
  const bool changed = !same_winner(fresh, request.current);
  request.current = std::move(fresh);
  state.pending[request_id] = request;
  const auto& res = state.reservations.at(request_id);
  if (changed) {
    release_old();
    deliver(state, request_id, request, out);
  } else if (!old || !(*old == res)) {
    release_old();
    out.push_back(Message{kBrokerId, res.provider_id, ReserveResources{request_id, res.provider_id, res.demand}});
  }
}

inline bool request_id_used(const State& state, const std::string& id) {
  if (state.pending.count(id)) return true;
  return std::any_of(state.registry.begin(), state.registry.end(),
                     [&](const RegistryEntry& e) { return e.request_id == id; });
}

inline bool apply_attribute(ServiceOffer& offer, const std::string& key, const Rational& value) {
  Feature* target = &offer.model.root;
  std::string name = key;
  if (auto dot = key.rfind('.'); dot != std::string::npos) {
    target = find_feature(offer.model.root, std::string_view(key).substr(0, dot));
    name = key.substr(dot + 1);
  }
  if (!target || name.empty()) return false;
  target->attributes[name] = value;
  return true;
}

}  // namespace detail

inline Transition handle_message(State state, const Message& msg) {
  ++state.logical_clock;
  std::vector<Message> out;
  const std::string& sender = msg.sender;

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GetContextAwareService>) {
          if (p.request_id.empty() || detail::request_id_used(state, p.request_id)) {
            out.push_back(detail::error_to(sender, p.request_id, Errc::duplicate_id,
                                           "request id '" + p.request_id + "' is empty or already used"));
            return;
          }
          PendingRequest request{sender, p, snapshot_to_observations(p.context, p.qoc), {}};
          State next = state;
          if (auto err = detail::serve(next, p.request_id, request, request.current)) {
            out.push_back(Message{kBrokerId, sender, std::move(*err)});
            return;
          }
          next.pending[p.request_id] = request;
          detail::deliver(next, p.request_id, request, out);
          state = std::move(next);
        } else if constexpr (std::is_same_v<P, FindServiceContext>) {
          const ServiceOffer* offer = state.find_offer(p.service_id);
          if (!offer) {
            out.push_back(detail::error_to(sender, "", Errc::unknown_id, "unknown service '" + p.service_id + "'"));
            return;
          }
          ServiceContextReply reply{offer->service_id, offer->provider_id, offer->model.root.attributes};
          reply.attributes["required_qoc"] = required_offer_qoc(*offer);
          out.push_back(Message{kBrokerId, sender, std::move(reply)});
        } else if constexpr (std::is_same_v<P, NotifyQoSChange>) {
          State next = state;
          ServiceOffer* offer = nullptr;
          for (auto& [_, offers] : next.providers) {
            for (auto& o : offers) {
              if (o.service_id == p.service_id) offer = &o;
            }
          }
          if (!offer) {
            out.push_back(detail::error_to(sender, "", Errc::unknown_id, "unknown service '" + p.service_id + "'"));
            return;
          }
          for (const auto& [key, value] : p.attributes) {
            if (!detail::apply_attribute(*offer, key, value)) {
              out.push_back(detail::error_to(sender, "", Errc::unknown_id, "unknown feature in '" + key + "'"));
              return;
            }
          }
          if (auto problems = validate_offer(*offer); !problems.empty()) {
            out.push_back(detail::error_to(sender, "", Errc::invalid_offer, problems.front()));
            return;
          }
          std::vector<std::string> live;
          for (const auto& [id, _] : next.pending) live.push_back(id);
          for (const auto& id : live) {
            const auto& req = next.pending.at(id);
            if (req.current.service_id == p.service_id) out.push_back(Message{kBrokerId, req.consumer_id, p});
            detail::rederive(next, id, out);
          }
          state = std::move(next);
        } else if constexpr (std::is_same_v<P, NotifyQoCChange>) {
          std::vector<std::string> affected;
          for (const auto& [id, req] : state.pending) {
            if (req.consumer_id == sender) affected.push_back(id);
          }
          if (affected.empty()) {
            out.push_back(detail::error_to(sender, "", Errc::unknown_id, "no live request for consumer '" + sender + "'"));
            return;
          }
          State next = state;
          out.push_back(Message{kBrokerId, sender, p});
          for (const auto& id : affected) {
            auto& obs = next.pending.at(id).observations;
            for (const auto& update : p.observations) {
              auto it = std::find_if(obs.begin(), obs.end(), [&](const auto& o) { return o.feature == update.feature; });
              if (it != obs.end()) {
                *it = update;
              } else {
                obs.push_back(update);
              }
            }
            detail::rederive(next, id, out);
          }
          state = std::move(next);
        } else if constexpr (std::is_same_v<P, ReleaseResources>) {
          auto it = state.pending.find(p.request_id);
          if (it == state.pending.end() || it->second.consumer_id != sender) {
            out.push_back(detail::error_to(sender, p.request_id, Errc::unknown_id,
                                           "no live request '" + p.request_id + "' for '" + sender + "'"));
            return;
          }
          state.pending.erase(it);
          if (auto res = state.reservations.find(p.request_id); res != state.reservations.end()) {
            out.push_back(Message{kBrokerId, res->second.provider_id, ReleaseResources{p.request_id, res->second.provider_id}});
            state.reservations.erase(res);
          }
        } else {
          out.push_back(detail::error_to(sender, "", Errc::unexpected_message,
                                         std::string(to_string(msg.kind())) + " is not accepted by the broker"));
        }
      },
      msg.payload);

  return Transition{std::move(state), std::move(out)};
}

struct TraceStep {
  Message input;
  std::vector<Message> outputs;
  std::uint64_t clock = 0;

  bool operator==(const TraceStep&) const = default;
};

struct Session {
  State state;
  std::vector<TraceStep> trace;
};

inline Session run_session(State initial, const std::vector<Message>& script) {
  Session s{std::move(initial), {}};
  s.trace.reserve(script.size());
  for (const auto& msg : script) {
    auto t = handle_message(std::move(s.state), msg);
    s.state = std::move(t.state);
    s.trace.push_back({msg, std::move(t.outputs), s.state.logical_clock});
  }
  return s;
}

}  // namespace cafm::broker

#endif  // CAFM_BROKER_HPP
