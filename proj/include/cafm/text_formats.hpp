#ifndef CAFM_TEXT_FORMATS_HPP
#define CAFM_TEXT_FORMATS_HPP

// Line-oriented `key = value` files: the context snapshot file and the
// requirements file. `#` starts a comment line; blank lines are ignored.

#include <charconv>
#include <istream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cafm/context.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"

namespace cafm {

struct KeyValueLine {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::string_view trim_view(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<KeyValueLine> read_key_values(std::istream& in) {
  std::vector<KeyValueLine> out;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    auto line = trim_view(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos) throw Error(Errc::syntax_error, "expected 'key = value'", number);
    auto key = trim_view(line.substr(0, eq));
    auto value = trim_view(line.substr(eq + 1));
    if (key.empty()) throw Error(Errc::syntax_error, "empty key", number);
    out.push_back({std::string(key), std::string(value), number});
  }
  return out;
}

/// Context snapshot plus the QoC of its readings. `qoc.<metric>` keys are
/// optional and default to 1.
struct ContextFile {
  ContextSnapshot snapshot;
  QoCMetrics qoc;
};

namespace detail {

inline Rational parse_unit_interval(const KeyValueLine& kv) {
  auto r = parse_rational(kv.value);
  if (!r || *r < 0 || *r > 1) throw Error(Errc::syntax_error, "'" + kv.key + "' must be a number in [0, 1]", kv.line);
  return *r;
}

}  // namespace detail

inline ContextFile parse_context_file(std::istream& in) {
  ContextFile out;
  for (const auto& kv : read_key_values(in)) {
    auto& s = out.snapshot;
    if (kv.key == "who") {
      s.who = kv.value;
    } else if (kv.key == "where") {
      s.where = kv.value;
    } else if (kv.key == "when") {
      std::int64_t t = -1;
      auto [end, ec] = std::from_chars(kv.value.data(), kv.value.data() + kv.value.size(), t);
      if (ec != std::errc{} || end != kv.value.data() + kv.value.size() || t < 0) {
        throw Error(Errc::syntax_error, "'when' must be a non-negative integer", kv.line);
      }
      s.when = t;
    } else if (kv.key == "what") {
      s.what = kv.value;
    } else if (kv.key == "why") {
      s.why = kv.value;
    } else if (kv.key == "device") {
      s.device = kv.value;
    } else if (kv.key == "security") {
      s.security = kv.value;
    } else if (kv.key.rfind("pref.", 0) == 0 && kv.key.size() > 5) {
      s.preferences.push_back({kv.key.substr(5), PropertyType::string, kv.value});
    } else if (kv.key == "qoc.precision") {
      out.qoc.precision = detail::parse_unit_interval(kv);
    } else if (kv.key == "qoc.probability_of_correctness") {
      out.qoc.probability_of_correctness = detail::parse_unit_interval(kv);
    } else if (kv.key == "qoc.trustworthiness") {
      out.qoc.trustworthiness = detail::parse_unit_interval(kv);
    } else if (kv.key == "qoc.resolution") {
      out.qoc.resolution = detail::parse_unit_interval(kv);
    } else if (kv.key == "qoc.up_to_dateness") {
      out.qoc.up_to_dateness = detail::parse_unit_interval(kv);
    } else {
      throw Error(Errc::syntax_error, "unknown key '" + kv.key + "'", kv.line);
    }
  }
  if (out.snapshot.who.empty()) throw Error(Errc::syntax_error, "missing 'who'");
  return out;
}

inline ContextFile parse_context_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_context_file(in);
}

/// `FeatureName = ChildName` per line.
inline std::vector<RequirementTriple> parse_requirements_file(std::istream& in) {
  std::vector<RequirementTriple> out;
  for (auto& kv : read_key_values(in)) {
    if (kv.value.empty()) throw Error(Errc::syntax_error, "requirement '" + kv.key + "' has no value", kv.line);
    out.push_back({std::move(kv.key), std::move(kv.value)});
  }
  return out;
}

inline std::vector<RequirementTriple> parse_requirements_file(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_requirements_file(in);
}

}  // namespace cafm

#endif  // CAFM_TEXT_FORMATS_HPP
