#ifndef CAFM_FM_XML_HPP
#define CAFM_FM_XML_HPP

// Reading and writing of the two XML formats:
//
//   *.fm.xml       <featureModel name=".." version="1">
//                    <feature name=".." mandatory="true" group="alternative">
//                      <attribute name="cost" value="0.1"/>
//                      <property name="unit" type="string" value="Euro/hour"/>
//                      <feature .../>
//                    </feature>
//                    <constraints><requires from=".." to=".."/></constraints>
//                  </featureModel>
//
//   *.product.xml  <product version="1">
//                    <feature name="..">
//                      <pointcuts><pointcut name="..">expr</pointcut></pointcuts>
//                      <bindings><before pointcut=".." aspect=".." name=".."/></bindings>
//                    </feature>
//                  </product>
//
// Output is canonical: two-space indent, attributes sorted by name, optional
// XML attributes omitted at their defaults, trailing newline.

#include <algorithm>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "cafm/analysis.hpp"
#include "cafm/error.hpp"
#include "cafm/feature_model.hpp"

namespace cafm {

enum class AdvicePosition { before, after, around };

inline constexpr std::string_view to_string(AdvicePosition p) noexcept {
  switch (p) {
    case AdvicePosition::before: return "before";
    case AdvicePosition::after: return "after";
    case AdvicePosition::around: return "around";
  }
  return "before";
}

/// Opaque pointcut expression, carried as data only.
struct Pointcut {
  std::string name;
  std::string expression;

  auto operator<=>(const Pointcut&) const = default;
};

struct Binding {
  AdvicePosition position = AdvicePosition::before;
  std::string pointcut;  // empty, or a pointcut declared in the same entry
  std::string aspect;
  std::string name;

  auto operator<=>(const Binding&) const = default;
};

struct ProductFeatureEntry {
  std::string name;
  std::vector<Pointcut> pointcuts;
  std::vector<Binding> bindings;

  bool operator==(const ProductFeatureEntry&) const = default;
};

struct ProductDescriptor {
  std::vector<ProductFeatureEntry> features;

  const ProductFeatureEntry* find(std::string_view name) const {
    auto it = std::find_if(features.begin(), features.end(), [&](const auto& e) { return e.name == name; });
    return it == features.end() ? nullptr : &*it;
  }

  ProductFeatureEntry* find(std::string_view name) {
    auto it = std::find_if(features.begin(), features.end(), [&](const auto& e) { return e.name == name; });
    return it == features.end() ? nullptr : &*it;
  }

  bool operator==(const ProductDescriptor&) const = default;
};

inline constexpr std::string_view kFormatVersion = "1";

namespace xml_detail {

namespace pt = boost::property_tree;

inline std::string escape(std::string_view s, bool attribute) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '"':
        if (attribute) { out += "&quot;"; break; }
        out += c;
        break;
      case '\n':
        if (attribute) { out += "&#10;"; break; }
        out += c;
        break;
      case '\t':
        if (attribute) { out += "&#9;"; break; }
        out += c;
        break;
      case '\r': out += "&#13;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline pt::ptree read(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_xml(in, tree, pt::xml_parser::no_comments);
  } catch (const pt::xml_parser_error& e) {
    throw Error(Errc::syntax_error, e.message(), e.line() == 0 ? 1 : e.line());
  }
  return tree;
}

/// Checked view of one element: its attributes and element children.
class Element {
 public:
  Element(std::string path, const pt::ptree& node) : path_(std::move(path)), node_(node) {}

  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const { throw Error(Errc::schema_error, path_ + ": " + what); }

  /// Rejects attributes outside `allowed`.
  void allow_attributes(std::initializer_list<std::string_view> allowed) const {
    if (auto attrs = node_.get_child_optional("<xmlattr>")) {
      for (const auto& [key, _] : *attrs) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail("unknown attribute '" + key + "'");
      }
    }
  }

  std::optional<std::string> attribute(const std::string& key) const {
    if (auto v = node_.get_optional<std::string>("<xmlattr>." + key)) return *v;
    return std::nullopt;
  }

  std::string required(const std::string& key) const {
    auto v = attribute(key);
    if (!v || v->empty()) fail("missing attribute '" + key + "'");
    return *v;
  }

  /// Element children as (tag, element); text content must be blank.
  std::vector<std::pair<std::string, Element>> children() const {
    if (!trim(node_.data()).empty()) fail("unexpected text content");
    std::vector<std::pair<std::string, Element>> out;
    for (const auto& [tag, child] : node_) {
      if (tag == "<xmlattr>") continue;
      out.emplace_back(tag, Element(path_ + "/" + tag, child));
    }
    return out;
  }

  std::string text() const {
    for (const auto& [tag, _] : node_) {
      if (tag != "<xmlattr>") fail("unexpected child element '" + tag + "'");
    }
    return trim(node_.data());
  }

 private:
  std::string path_;
  const pt::ptree& node_;
};

inline Element document_root(const pt::ptree& tree, std::string_view expected) {
  std::vector<std::pair<std::string, const pt::ptree*>> tops;
  for (const auto& [tag, child] : tree) tops.emplace_back(tag, &child);
  if (tops.size() != 1) throw Error(Errc::schema_error, "document must have exactly one root element");
  if (tops.front().first != expected) {
    throw Error(Errc::schema_error, "root element is '" + tops.front().first + "', expected '" + std::string(expected) + "'");
  }
  Element root(tops.front().first, *tops.front().second);
  if (auto v = root.attribute("version"); v && *v != kFormatVersion) root.fail("unsupported version '" + *v + "'");
  return root;
}

inline Feature parse_feature(const Element& el, GroupKind parent_group, bool is_root) {
  el.allow_attributes({"name", "mandatory", "group"});
  Feature f;
  f.name = el.required("name");
  if (auto m = el.attribute("mandatory")) {
    if (*m == "true") {
      f.variability = Variability::mandatory;
    } else if (*m != "false") {
      el.fail("feature '" + f.name + "': mandatory must be true or false");
    }
    if (f.is_mandatory() && !is_root && parent_group != GroupKind::and_group) {
      el.fail("feature '" + f.name + "': members of an alternative/or group cannot be mandatory");
    }
  }
  if (auto g = el.attribute("group")) {
    auto kind = group_from_string(*g);
    if (!kind) el.fail("feature '" + f.name + "': unknown group '" + *g + "'");
    f.group = *kind;
  }
  for (const auto& [tag, child] : el.children()) {
    if (tag == "feature") {
      f.children.push_back(parse_feature(child, f.group, false));
    } else if (tag == "attribute") {
      child.allow_attributes({"name", "value"});
      auto key = child.required("name");
      auto text = child.required("value");
      auto value = parse_rational(text);
      if (!value) child.fail("attribute '" + key + "' has non-numeric value '" + text + "'");
      if (!f.attributes.emplace(key, *value).second) child.fail("duplicate attribute '" + key + "'");
    } else if (tag == "property") {
      child.allow_attributes({"name", "type", "value"});
      PropertyTriple p;
      p.name = child.required("name");
      auto type = property_type_from_string(child.attribute("type").value_or("string"));
      if (!type) child.fail("property '" + p.name + "' has unknown type");
      p.type = *type;
      auto value = child.attribute("value");
      if (!value) child.fail("missing attribute 'value'");
      p.value = *value;
      f.properties.push_back(std::move(p));
    } else {
      child.fail("unknown element '" + tag + "'");
    }
  }
  return f;
}

class Writer {
 public:
  void open(std::string_view tag, std::initializer_list<std::pair<std::string_view, std::string>> attrs,
            bool empty) {
    line_start();
    out_ << '<' << tag;
    for (const auto& [k, v] : attrs) out_ << ' ' << k << "=\"" << escape(v, true) << '"';
    out_ << (empty ? "/>\n" : ">\n");
    if (!empty) ++depth_;
  }

  void open_attrs(std::string_view tag, const std::vector<std::pair<std::string, std::string>>& attrs, bool empty) {
    line_start();
    out_ << '<' << tag;
    for (const auto& [k, v] : attrs) out_ << ' ' << k << "=\"" << escape(v, true) << '"';
    out_ << (empty ? "/>\n" : ">\n");
    if (!empty) ++depth_;
  }

  void text_element(std::string_view tag, std::string_view name, std::string_view text) {
    line_start();
    out_ << '<' << tag << " name=\"" << escape(name, true) << "\">" << escape(text, false) << "</" << tag << ">\n";
  }

  void close(std::string_view tag) {
    --depth_;
    line_start();
    out_ << "</" << tag << ">\n";
  }

  std::string str() const { return out_.str(); }

 private:
  void line_start() { out_ << std::string(static_cast<std::size_t>(depth_) * 2, ' '); }

  std::ostringstream out_;
  int depth_ = 0;
};

inline void write_feature(Writer& w, const Feature& f, bool is_root) {
  std::vector<std::pair<std::string, std::string>> attrs{{"name", f.name}};
  if (!is_root && f.is_mandatory()) attrs.emplace_back("mandatory", "true");
  if (f.group != GroupKind::and_group) attrs.emplace_back("group", std::string(to_string(f.group)));
  const bool empty = f.children.empty() && f.attributes.empty() && f.properties.empty();
  w.open_attrs("feature", attrs, empty);
  if (empty) return;
  for (const auto& [key, value] : f.attributes) {
    w.open("attribute", {{"name", key}, {"value", format_rational(value)}}, true);
  }
  for (const auto& p : f.properties) {
    w.open("property", {{"name", p.name}, {"type", std::string(to_string(p.type))}, {"value", p.value}}, true);
  }
  for (const auto& child : f.children) write_feature(w, child, false);
  w.close("feature");
}

}  // namespace xml_detail

/// Parses a `*.fm.xml` document. The result always passes validate_model;
/// otherwise throws semantic-error carrying the model errors.
inline FeatureModel parse_feature_model(std::istream& in) {
  using xml_detail::Element;
  auto tree = xml_detail::read(in);
  Element root = xml_detail::document_root(tree, "featureModel");
  root.allow_attributes({"name", "version"});

  FeatureModel fm;
  fm.name = root.required("name");
  bool have_root = false;
  bool have_constraints = false;
  for (const auto& [tag, child] : root.children()) {
    if (tag == "feature") {
      if (have_root) child.fail("a feature model has exactly one root feature");
      fm.root = xml_detail::parse_feature(child, GroupKind::and_group, true);
      fm.root.variability = Variability::mandatory;
      have_root = true;
    } else if (tag == "constraints") {
      if (have_constraints) child.fail("duplicate constraints element");
      have_constraints = true;
      child.allow_attributes({});
      for (const auto& [kind, c] : child.children()) {
        CrossTreeConstraint ctc;
        if (kind == "requires") {
          ctc.kind = ConstraintKind::requires_feature;
        } else if (kind == "excludes") {
          ctc.kind = ConstraintKind::excludes_feature;
        } else {
          c.fail("unknown element '" + kind + "'");
        }
        c.allow_attributes({"from", "to"});
        ctc.from = c.required("from");
        ctc.to = c.required("to");
        fm.constraints.push_back(std::move(ctc));
      }
    } else {
      child.fail("unknown element '" + tag + "'");
    }
  }
  if (!have_root) root.fail("missing root feature");

  if (auto errors = validate_model(fm); !errors.empty()) {
    std::string detail = "model '" + fm.name + "' has " + std::to_string(errors.size()) + " error(s)";
    throw Error(Errc::semantic_error, detail, std::move(errors));
  }
  return fm;
}

inline FeatureModel parse_feature_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_feature_model(in);
}

inline std::string serialize_feature_model(const FeatureModel& fm) {
  xml_detail::Writer w;
  w.open("featureModel", {{"name", fm.name}, {"version", std::string(kFormatVersion)}}, false);
  xml_detail::write_feature(w, fm.root, true);
  if (!fm.constraints.empty()) {
    w.open("constraints", {}, false);
    for (const auto& c : fm.constraints) {
      w.open(c.kind == ConstraintKind::requires_feature ? "requires" : "excludes", {{"from", c.from}, {"to", c.to}},
             true);
    }
    w.close("constraints");
  }
  w.close("featureModel");
  return w.str();
}

/// Writes the product document. Every entry must name a feature of `cfg`.
inline std::string serialize_product(const Configuration& cfg, const ProductDescriptor& pd) {
  for (const auto& entry : pd.features) {
    if (!cfg.contains(entry.name)) {
      throw Error(Errc::unselected_feature, "product entry '" + entry.name + "' is not selected");
    }
  }
  xml_detail::Writer w;
  w.open("product", {{"version", std::string(kFormatVersion)}}, pd.features.empty());
  if (pd.features.empty()) return w.str();
  for (const auto& entry : pd.features) {
    const bool empty = entry.pointcuts.empty() && entry.bindings.empty();
    w.open("feature", {{"name", entry.name}}, empty);
    if (empty) continue;
    if (!entry.pointcuts.empty()) {
      w.open("pointcuts", {}, false);
      for (const auto& p : entry.pointcuts) w.text_element("pointcut", p.name, p.expression);
      w.close("pointcuts");
    }
    if (!entry.bindings.empty()) {
      w.open("bindings", {}, false);
      for (const auto& b : entry.bindings) {
        w.open(to_string(b.position), {{"pointcut", b.pointcut}, {"aspect", b.aspect}, {"name", b.name}}, true);
      }
      w.close("bindings");
    }
    w.close("feature");
  }
  w.close("product");
  return w.str();
}

inline ProductDescriptor parse_product(std::istream& in) {
  using xml_detail::Element;
  auto tree = xml_detail::read(in);
  Element root = xml_detail::document_root(tree, "product");
  root.allow_attributes({"version"});

  ProductDescriptor pd;
  std::set<std::string> names;
  for (const auto& [tag, el] : root.children()) {
    if (tag != "feature") el.fail("unknown element '" + tag + "'");
    el.allow_attributes({"name"});
    ProductFeatureEntry entry;
    entry.name = el.required("name");
    if (!names.insert(entry.name).second) el.fail("duplicate feature '" + entry.name + "'");

    bool have_pointcuts = false;
    bool have_bindings = false;
    for (const auto& [section, sec] : el.children()) {
      if (section == "pointcuts") {
        if (have_pointcuts) sec.fail("duplicate pointcuts element");
        have_pointcuts = true;
        sec.allow_attributes({});
        for (const auto& [ptag, p] : sec.children()) {
          if (ptag != "pointcut") p.fail("unknown element '" + ptag + "'");
          p.allow_attributes({"name"});
          entry.pointcuts.push_back({p.required("name"), p.text()});
        }
      } else if (section == "bindings") {
        if (have_bindings) sec.fail("duplicate bindings element");
        have_bindings = true;
        sec.allow_attributes({});
        for (const auto& [btag, b] : sec.children()) {
          Binding binding;
          if (btag == "before") {
            binding.position = AdvicePosition::before;
          } else if (btag == "after") {
            binding.position = AdvicePosition::after;
          } else if (btag == "around") {
            binding.position = AdvicePosition::around;
          } else {
            b.fail("unknown element '" + btag + "'");
          }
          b.allow_attributes({"pointcut", "aspect", "name"});
          b.children();  // must be empty
          binding.pointcut = b.attribute("pointcut").value_or("");
          binding.aspect = b.required("aspect");
          binding.name = b.required("name");
          entry.bindings.push_back(std::move(binding));
        }
      } else {
        sec.fail("unknown element '" + section + "'");
      }
    }
    for (const auto& b : entry.bindings) {
      if (b.pointcut.empty()) continue;
      auto declared = std::any_of(entry.pointcuts.begin(), entry.pointcuts.end(),
                                  [&](const Pointcut& p) { return p.name == b.pointcut; });
      if (!declared) el.fail("binding '" + b.name + "' references undeclared pointcut '" + b.pointcut + "'");
    }
    pd.features.push_back(std::move(entry));
  }
  return pd;
}

inline ProductDescriptor parse_product(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_product(in);
}

}  // namespace cafm

#endif  // CAFM_FM_XML_HPP
