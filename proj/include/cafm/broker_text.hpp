#ifndef CAFM_BROKER_TEXT_HPP
#define CAFM_BROKER_TEXT_HPP

// Line notation for broker messages and session traces.
//
//   message  := KIND SP sender { SP token }
//   token    := key "=" value
//   trace    := "@" clock SP message " =>" { SP message " |" } ...
//
// Values are percent-encoded (whitespace, '%', '|', '=', ',' and control
// bytes), so a message never contains a bare " | " or " => ".
//
// Keys per kind:
//   common                   to=<recipient>
//   GetContextAwareService   id= threshold= req:<Feature>=<Child>
//                            ctx.who= ctx.where= ctx.when= ctx.what= ctx.why=
//                            ctx.device= ctx.security= pref:<name>=<value>
//                            qoc.<metric>=
//   FindServiceContext       service=
//   ServiceContextReply      service= provider= attr:<name>=
//   NotifyQoSChange          service= attr:<Feature.attribute>=
//   NotifyQoCChange          obs:<Feature>=<Value> qoc.<metric>=
//   SendContextAwareService  id= service= provider= cost= qoc= config=A,B
//                            prop:<name>:<type>=<value> product=A,B
//                            pointcut:<Feature>/<name>=<expr>
//                            bind:<Feature>/<position>=<pointcut>,<aspect>,<name>
//   ErrorReply               id= error=<category> detail=
//   ReserveResources         id= provider= res:<key>=
//   ReleaseResources         id= provider=

#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cafm/broker.hpp"

namespace cafm::broker {

inline std::string encode_value(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (char ch : s) {
    auto c = static_cast<unsigned char>(ch);
    if (c <= 0x20 || c == 0x7f || c == '%' || c == '|' || c == '=' || c == ',') {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0xf];
    } else {
      out += ch;
    }
  }
  return out;
}

inline std::string decode_value(std::string_view s) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw Error(Errc::syntax_error, "bad percent escape in '" + std::string(s) + "'");
  };
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out += s[i];
      continue;
    }
    if (i + 2 >= s.size()) throw Error(Errc::syntax_error, "truncated escape");
    out += static_cast<char>(nibble(s[i + 1]) * 16 + nibble(s[i + 2]));
    i += 2;
  }
  return out;
}

namespace text_detail {

inline std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += ',';
    out += encode_value(p);
  }
  return out;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (s.empty()) return out;
  std::size_t start = 0;
  while (true) {
    auto comma = s.find(',', start);
    out.push_back(decode_value(s.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

class TokenWriter {
 public:
  explicit TokenWriter(std::string head) : out_(std::move(head)) {}
  void add(std::string_view key, std::string_view value) {
    out_ += ' ';
    out_ += key;
    out_ += '=';
    out_ += encode_value(value);
  }
  void add_raw(std::string_view key, std::string_view encoded) {
    out_ += ' ';
    out_ += key;
    out_ += '=';
    out_ += encoded;
  }
  std::string str() && { return std::move(out_); }

 private:
  std::string out_;
};

inline const char* const kQoCKeys[] = {"qoc.precision", "qoc.probability_of_correctness", "qoc.trustworthiness",
                                       "qoc.resolution", "qoc.up_to_dateness"};

inline Rational* qoc_slot(QoCMetrics& q, std::string_view key) {
  if (key == kQoCKeys[0]) return &q.precision;
  if (key == kQoCKeys[1]) return &q.probability_of_correctness;
  if (key == kQoCKeys[2]) return &q.trustworthiness;
  if (key == kQoCKeys[3]) return &q.resolution;
  if (key == kQoCKeys[4]) return &q.up_to_dateness;
  return nullptr;
}

inline void write_qoc(TokenWriter& w, const QoCMetrics& q) {
  QoCMetrics copy = q;
  for (const char* key : kQoCKeys) {
    const Rational& r = *qoc_slot(copy, key);
    if (r != 1) w.add(key, format_rational(r));
  }
}

inline Rational to_rational(std::string_view key, const std::string& value) {
  auto r = parse_rational(value);
  if (!r) throw Error(Errc::syntax_error, "'" + std::string(key) + "' expects a number, got '" + value + "'");
  return *r;
}

}  // namespace text_detail

inline std::string format_message(const Message& m) {
  using text_detail::TokenWriter;
  TokenWriter w(std::string(to_string(m.kind())) + " " + encode_value(m.sender));
  if (!m.recipient.empty()) w.add("to", m.recipient);

  std::visit(
      [&](const auto& p) {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GetContextAwareService>) {
          w.add("id", p.request_id);
          w.add("threshold", format_rational(p.qoc_threshold));
          for (const auto& r : p.requirements) w.add("req:" + encode_value(r.feature), r.value);
          const auto& c = p.context;
          if (!c.who.empty()) w.add("ctx.who", c.who);
          if (!c.where.empty()) w.add("ctx.where", c.where);
          if (c.when != 0) w.add("ctx.when", std::to_string(c.when));
          if (!c.what.empty()) w.add("ctx.what", c.what);
          if (!c.why.empty()) w.add("ctx.why", c.why);
          if (!c.device.empty()) w.add("ctx.device", c.device);
          if (!c.security.empty()) w.add("ctx.security", c.security);
          for (const auto& pref : c.preferences) w.add("pref:" + encode_value(pref.name), pref.value);
          text_detail::write_qoc(w, p.qoc);
        } else if constexpr (std::is_same_v<P, FindServiceContext>) {
          w.add("service", p.service_id);
        } else if constexpr (std::is_same_v<P, ServiceContextReply>) {
          w.add("service", p.service_id);
          w.add("provider", p.provider_id);
          for (const auto& [k, v] : p.attributes) w.add("attr:" + encode_value(k), format_rational(v));
        } else if constexpr (std::is_same_v<P, NotifyQoSChange>) {
          w.add("service", p.service_id);
          for (const auto& [k, v] : p.attributes) w.add("attr:" + encode_value(k), format_rational(v));
        } else if constexpr (std::is_same_v<P, NotifyQoCChange>) {
          for (const auto& o : p.observations) w.add("obs:" + encode_value(o.feature), o.value);
          if (!p.observations.empty()) text_detail::write_qoc(w, p.observations.front().qoc);
        } else if constexpr (std::is_same_v<P, SendContextAwareService>) {
          const auto& r = p.result;
          w.add("id", p.request_id);
          w.add("service", r.service_id);
          w.add("provider", r.provider_id);
          w.add("cost", format_rational(r.total_cost));
          w.add("qoc", format_rational(r.achieved_qoc));
          w.add_raw("config", text_detail::join({r.configuration.selected.begin(), r.configuration.selected.end()}));
          for (const auto& t : r.bound_properties) {
            w.add("prop:" + encode_value(t.name) + ":" + std::string(to_string(t.type)), t.value);
          }
          std::vector<std::string> entries;
          for (const auto& e : p.product.features) entries.push_back(e.name);
          w.add_raw("product", text_detail::join(entries));
          for (const auto& e : p.product.features) {
            for (const auto& pc : e.pointcuts) w.add("pointcut:" + encode_value(e.name) + "/" + encode_value(pc.name), pc.expression);
            for (const auto& b : e.bindings) {
              w.add_raw("bind:" + encode_value(e.name) + "/" + std::string(to_string(b.position)),
                        text_detail::join({b.pointcut, b.aspect, b.name}));
            }
          }
        } else if constexpr (std::is_same_v<P, ErrorReply>) {
          if (!p.request_id.empty()) w.add("id", p.request_id);
          w.add("error", to_string(p.error));
          if (!p.detail.empty()) w.add("detail", p.detail);
        } else if constexpr (std::is_same_v<P, ReserveResources>) {
          w.add("id", p.request_id);
          w.add("provider", p.provider_id);
          for (const auto& [k, v] : p.demand) w.add("res:" + encode_value(k), format_rational(v));
        } else if constexpr (std::is_same_v<P, ReleaseResources>) {
          w.add("id", p.request_id);
          if (!p.provider_id.empty()) w.add("provider", p.provider_id);
        }
      },
      m.payload);
  return std::move(w).str();
}

/// Parses one message line. Throws syntax-error on malformed input.
inline Message parse_message(std::string_view line) {
  std::istringstream in{std::string(line)};
  std::string kind_text;
  std::string sender;
  if (!(in >> kind_text >> sender)) throw Error(Errc::syntax_error, "expected 'KIND sender ...'");

  std::size_t kind_index = std::size(kKindNames);
  for (std::size_t i = 0; i < std::size(kKindNames); ++i) {
    if (kKindNames[i] == kind_text) kind_index = i;
  }
  if (kind_index == std::size(kKindNames)) throw Error(Errc::syntax_error, "unknown message kind '" + kind_text + "'");

  std::vector<std::pair<std::string, std::string>> tokens;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos || eq == 0) throw Error(Errc::syntax_error, "expected key=value, got '" + tok + "'");
    tokens.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
  }

  Message m;
  m.sender = decode_value(sender);
  auto unknown = [&](const std::string& key) {
    throw Error(Errc::syntax_error, "unexpected key '" + key + "' for " + kind_text);
  };
  auto prefixed = [](const std::string& key, std::string_view prefix) -> std::optional<std::string> {
    if (key.size() > prefix.size() && key.compare(0, prefix.size(), prefix) == 0) {
      return decode_value(std::string_view(key).substr(prefix.size()));
    }
    return std::nullopt;
  };

  switch (static_cast<MessageKind>(kind_index)) {
    case MessageKind::GetContextAwareService: {
      GetContextAwareService p;
      bool have_who = false;
      for (const auto& [key, raw] : tokens) {
        const std::string v = decode_value(raw);
        auto& c = p.context;
        if (key == "to") m.recipient = v;
        else if (key == "id") p.request_id = v;
        else if (key == "threshold") p.qoc_threshold = text_detail::to_rational(key, v);
        else if (auto f = prefixed(key, "req:")) p.requirements.push_back({*f, v});
        else if (key == "ctx.who") { c.who = v; have_who = true; }
        else if (key == "ctx.where") c.where = v;
        else if (key == "ctx.when") {
          try {
            std::size_t used = 0;
            c.when = std::stoll(v, &used);
            if (used != v.size() || c.when < 0) throw std::invalid_argument(v);
          } catch (const std::exception&) {
            throw Error(Errc::syntax_error, "ctx.when must be a non-negative integer");
          }
        }
        else if (key == "ctx.what") c.what = v;
        else if (key == "ctx.why") c.why = v;
        else if (key == "ctx.device") c.device = v;
        else if (key == "ctx.security") c.security = v;
        else if (auto n = prefixed(key, "pref:")) c.preferences.push_back({*n, PropertyType::string, v});
        else if (Rational* slot = text_detail::qoc_slot(p.qoc, key)) *slot = text_detail::to_rational(key, v);
        else unknown(key);
      }
      if (!have_who) p.context.who = m.sender;
      if (!p.qoc.in_range()) throw Error(Errc::syntax_error, "qoc metrics must lie in [0, 1]");
      m.payload = std::move(p);
      break;
    }
    case MessageKind::FindServiceContext: {
      FindServiceContext p;
      for (const auto& [key, raw] : tokens) {
        if (key == "to") m.recipient = decode_value(raw);
        else if (key == "service") p.service_id = decode_value(raw);
        else unknown(key);
      }
      m.payload = std::move(p);
      break;
    }
    case MessageKind::ServiceContextReply:
    case MessageKind::NotifyQoSChange: {
      std::string service;
      std::string provider;
      std::map<std::string, Rational> attrs;
      for (const auto& [key, raw] : tokens) {
        if (key == "to") m.recipient = decode_value(raw);
        else if (key == "service") service = decode_value(raw);
        else if (key == "provider" && kind_index == static_cast<std::size_t>(MessageKind::ServiceContextReply)) provider = decode_value(raw);
        else if (auto a = prefixed(key, "attr:")) attrs[*a] = text_detail::to_rational(key, decode_value(raw));
        else unknown(key);
      }
      if (kind_index == static_cast<std::size_t>(MessageKind::ServiceContextReply)) {
        m.payload = ServiceContextReply{service, provider, attrs};
      } else {
        m.payload = NotifyQoSChange{service, attrs};
      }
      break;
    }
    case MessageKind::NotifyQoCChange: {
      NotifyQoCChange p;
      QoCMetrics q;
      for (const auto& [key, raw] : tokens) {
        if (key == "to") m.recipient = decode_value(raw);
        else if (auto f = prefixed(key, "obs:")) p.observations.push_back({*f, decode_value(raw), {}});
        else if (Rational* slot = text_detail::qoc_slot(q, key)) *slot = text_detail::to_rational(key, decode_value(raw));
        else unknown(key);
      }
      if (!q.in_range()) throw Error(Errc::syntax_error, "qoc metrics must lie in [0, 1]");
      for (auto& o : p.observations) o.qoc = q;
      m.payload = std::move(p);
      break;
    }
    case MessageKind::SendContextAwareService: {
      SendContextAwareService p;
      auto& r = p.result;
      for (const auto& [key, raw] : tokens) {
        if (key == "to") m.recipient = decode_value(raw);
        else if (key == "id") p.request_id = decode_value(raw);
        else if (key == "service") r.service_id = decode_value(raw);
        else if (key == "provider") r.provider_id = decode_value(raw);
        else if (key == "cost") r.total_cost = text_detail::to_rational(key, decode_value(raw));
        else if (key == "qoc") r.achieved_qoc = text_detail::to_rational(key, decode_value(raw));
        else if (key == "config") {
          for (auto& name : text_detail::split_list(raw)) r.configuration.selected.insert(std::move(name));
        } else if (auto prop = prefixed(key, "prop:")) {
          auto colon = prop->rfind(':');
          if (colon == std::string::npos) unknown(key);
          auto type = property_type_from_string(prop->substr(colon + 1));
          if (!type) unknown(key);
          r.bound_properties.push_back({prop->substr(0, colon), *type, decode_value(raw)});
        } else if (key == "product") {
          for (auto& name : text_detail::split_list(raw)) p.product.features.push_back({std::move(name), {}, {}});
        } else if (auto pc = prefixed(key, "pointcut:")) {
          auto slash = pc->find('/');
          if (slash == std::string::npos) unknown(key);
          auto* entry = p.product.find(pc->substr(0, slash));
          if (!entry) throw Error(Errc::syntax_error, "pointcut for unlisted product feature");
          entry->pointcuts.push_back({pc->substr(slash + 1), decode_value(raw)});
        } else if (auto b = prefixed(key, "bind:")) {
          auto slash = b->find('/');
          if (slash == std::string::npos) unknown(key);
          auto* entry = p.product.find(b->substr(0, slash));
          if (!entry) throw Error(Errc::syntax_error, "binding for unlisted product feature");
          auto parts = text_detail::split_list(raw);
          if (parts.size() != 3) throw Error(Errc::syntax_error, "binding needs pointcut,aspect,name");
          const std::string pos = b->substr(slash + 1);
          Binding binding;
          if (pos == "before") binding.position = AdvicePosition::before;
          else if (pos == "after") binding.position = AdvicePosition::after;
          else if (pos == "around") binding.position = AdvicePosition::around;
          else unknown(key);
          binding.pointcut = parts[0];
          binding.aspect = parts[1];
          binding.name = parts[2];
          entry->bindings.push_back(std::move(binding));
        } else {
          unknown(key);
        }
      }
      m.payload = std::move(p);
      break;
    }
    case MessageKind::ErrorReply: {
      ErrorReply p;
      for (const auto& [key, raw] : tokens) {
        const std::string v = decode_value(raw);
        if (key == "to") m.recipient = v;
        else if (key == "id") p.request_id = v;
        else if (key == "error") {
          if (!errc_from_string(v, p.error)) throw Error(Errc::syntax_error, "unknown error category '" + v + "'");
        } else if (key == "detail") p.detail = v;
        else unknown(key);
      }
      m.payload = std::move(p);
      break;
    }
    case MessageKind::ReserveResources: {
      ReserveResources p;
      for (const auto& [key, raw] : tokens) {
        const std::string v = decode_value(raw);
        if (key == "to") m.recipient = v;
        else if (key == "id") p.request_id = v;
        else if (key == "provider") p.provider_id = v;
        else if (auto k = prefixed(key, "res:")) p.demand[*k] = text_detail::to_rational(key, v);
        else unknown(key);
      }
      m.payload = std::move(p);
      break;
    }
    case MessageKind::ReleaseResources: {
      ReleaseResources p;
      for (const auto& [key, raw] : tokens) {
        const std::string v = decode_value(raw);
        if (key == "to") m.recipient = v;
        else if (key == "id") p.request_id = v;
        else if (key == "provider") p.provider_id = v;
        else unknown(key);
      }
      m.payload = std::move(p);
      break;
    }
  }
  if (m.sender.empty()) throw Error(Errc::syntax_error, "empty sender");
  return m;
}

inline std::string format_trace_step(const TraceStep& step) {
  std::string line = "@" + std::to_string(step.clock) + " " + format_message(step.input) + " =>";
  for (std::size_t i = 0; i < step.outputs.size(); ++i) {
    line += i == 0 ? " " : " | ";
    line += format_message(step.outputs[i]);
  }
  return line;
}

inline std::string format_trace(const std::vector<TraceStep>& trace) {
  std::string out;
  for (const auto& step : trace) {
    out += format_trace_step(step);
    out += '\n';
  }
  return out;
}

}  // namespace cafm::broker

#endif  // CAFM_BROKER_TEXT_HPP
