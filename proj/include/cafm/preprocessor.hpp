#ifndef CAFM_PREPROCESSOR_HPP
#define CAFM_PREPROCESSOR_HPP

// Line-based conditional compilation with Antenna-style comment directives:
//
//   //#if Feature
//   ...
//   //#else
//   ...
//   //#endif
//
// A directive is recognised only when `//#` follows nothing but leading
// whitespace. The source language is never parsed, so a directive-looking
// line inside a string literal is still a directive.

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cafm/error.hpp"

namespace cafm {

enum class DirectiveKind { if_directive, else_directive, endif_directive, plain };

struct DirectiveLine {
  DirectiveKind kind = DirectiveKind::plain;
  std::string feature;  // if_directive only
  std::string raw;      // line text including its terminator, if any
  std::size_t line_number = 0;

  bool operator==(const DirectiveLine&) const = default;
};

namespace detail {

inline std::vector<std::string> split_lines_keep_terminators(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start + 1));
    start = nl + 1;
  }
  return lines;
}

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v'; }

inline DirectiveLine classify(const std::string& raw, std::size_t number) {
  DirectiveLine d{DirectiveKind::plain, {}, raw, number};
  std::string_view s(raw);
  std::size_t i = 0;
  while (i < s.size() && is_space(s[i])) ++i;
  s.remove_prefix(i);
  if (s.substr(0, 3) != "//#") return d;
  s.remove_prefix(3);

  std::size_t word_end = 0;
  while (word_end < s.size() && !is_space(s[word_end])) ++word_end;
  const std::string_view word = s.substr(0, word_end);
  std::string_view rest = s.substr(word_end);
  while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);

  if (word == "if") {
    std::size_t name_end = 0;
    while (name_end < rest.size() && !is_space(rest[name_end])) ++name_end;
    if (name_end == 0) throw Error(Errc::malformed_directive, "//#if without a feature name", number);
    d.kind = DirectiveKind::if_directive;
    d.feature = std::string(rest.substr(0, name_end));
  } else if (word == "else") {
    d.kind = DirectiveKind::else_directive;
  } else if (word == "endif") {
    d.kind = DirectiveKind::endif_directive;
  }
  return d;
}

}  // namespace detail

/// Classifies every line and checks nesting. Errors carry the offending line.
inline std::vector<DirectiveLine> scan_directives(std::string_view source) {
  std::vector<DirectiveLine> out;
  struct Open {
    std::size_t line;
    bool seen_else;
  };
  std::vector<Open> stack;
  std::size_t number = 0;
  for (auto& raw : detail::split_lines_keep_terminators(source)) {
    auto d = detail::classify(raw, ++number);
    switch (d.kind) {
      case DirectiveKind::if_directive:
        stack.push_back({number, false});
        break;
      case DirectiveKind::else_directive:
        if (stack.empty() || stack.back().seen_else) {
          throw Error(Errc::else_without_if, "//#else without a matching //#if", number);
        }
        stack.back().seen_else = true;
        break;
      case DirectiveKind::endif_directive:
        if (stack.empty()) throw Error(Errc::unbalanced_endif, "//#endif without a matching //#if", number);
        stack.pop_back();
        break;
      case DirectiveKind::plain:
        break;
    }
    out.push_back(std::move(d));
  }
  if (!stack.empty()) {
    throw Error(Errc::unterminated_if, "//#if is never closed", stack.back().line);
  }
  return out;
}

/// Keeps the plain lines whose enclosing conditions all hold under
/// `selected`; directive lines are dropped and kept lines are byte-identical.
inline std::string preprocess(std::string_view source, const std::set<std::string>& selected) {
  std::string out;
  out.reserve(source.size());
  std::vector<bool> frames;  // current branch value per open //#if
  std::size_t inactive = 0;  // number of frames currently false
  for (const auto& d : scan_directives(source)) {
    switch (d.kind) {
      case DirectiveKind::if_directive: {
        const bool on = selected.count(d.feature) != 0;
        frames.push_back(on);
        if (!on) ++inactive;
        break;
      }
      case DirectiveKind::else_directive:
        if (frames.back()) {
          ++inactive;
        } else {
          --inactive;
        }
        frames.back() = !frames.back();
        break;
      case DirectiveKind::endif_directive:
        if (!frames.back()) --inactive;
        frames.pop_back();
        break;
      case DirectiveKind::plain:
        if (inactive == 0) out += d.raw;
        break;
    }
  }
  return out;
}

/// Feature guarding a whole file: set when the first line is `//#if F`.
inline std::optional<std::string> file_guard(std::string_view source) {
  auto nl = source.find('\n');
  std::string first(source.substr(0, nl));
  auto d = detail::classify(first, 1);
  if (d.kind == DirectiveKind::if_directive) return d.feature;
  return std::nullopt;
}

}  // namespace cafm

#endif  // CAFM_PREPROCESSOR_HPP
