#ifndef CAFM_CLI_HPP
#define CAFM_CLI_HPP

// Command-line driver. `run` is the whole program minus process plumbing so
// it can be exercised in-process:
//
//   validate   <model.fm.xml>
//   products   <model.fm.xml> [--count] [--limit N]
//   derive     --context <ctx> --context-model <fm.xml> --requirements <reqs>
//              --offers <dir> [--qoc-threshold r] [--product-out file]
//   broker-sim --script <session>
//   preprocess --config <product.xml|list> --in <dir> --out <dir>
//
// Every subcommand accepts --format=text|xml. Exit status: 0 success, 1 domain
// error (category on stderr), 2 usage error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cafm/analysis.hpp"
#include "cafm/broker.hpp"
#include "cafm/broker_text.hpp"
#include "cafm/context.hpp"
#include "cafm/cscafm.hpp"
#include "cafm/error.hpp"
#include "cafm/fm_xml.hpp"
#include "cafm/preprocessor.hpp"
#include "cafm/text_formats.hpp"

namespace cafm::cli {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io_error, "cannot write '" + path.string() + "'");
  out << content;
}

inline FeatureModel load_model(const fs::path& path) {
  try {
    return parse_feature_model(read_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::semantic_error) {
      throw Error(e.code(), path.string() + ": " + e.what(), e.model_errors());
    }
    throw Error(e.code(), path.string() + ": " + e.what(), e.line());
  }
}

inline bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

/// Offers are the `*.fm.xml` files under `dir`. A file inside a first-level
/// subdirectory belongs to the provider named after that subdirectory;
/// otherwise the provider id is the service id. The service id is the model
/// name. A sibling `<stem>.product.xml` supplies the descriptor template.
inline std::vector<ServiceOffer> load_offers(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::io_error, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (entry.is_regular_file() && ends_with(entry.path().filename().string(), ".fm.xml")) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ServiceOffer> offers;
  for (const auto& file : files) {
    ServiceOffer offer;
    offer.model = load_model(file);
    offer.service_id = offer.model.name;
    const auto rel = fs::relative(file, dir);
    offer.provider_id = std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : offer.service_id;
    std::string stem = file.filename().string();
    stem.resize(stem.size() - std::string_view(".fm.xml").size());
    if (auto product = file.parent_path() / (stem + ".product.xml"); fs::exists(product)) {
      offer.descriptor = parse_product(read_file(product));
    }
    if (auto problems = validate_offer(offer); !problems.empty()) {
      throw Error(Errc::invalid_offer, file.string() + ": " + problems.front());
    }
    for (const auto& other : offers) {
      if (other.service_id == offer.service_id) {
        throw Error(Errc::invalid_offer, file.string() + ": duplicate service id '" + offer.service_id + "'");
      }
    }
    offers.push_back(std::move(offer));
  }
  return offers;
}

/// Session script: setup directives, then one broker message per line.
///
///   CONTEXT <model.fm.xml>
///   PROVIDER <id> offer=<model.fm.xml> [offer=...] [cap.<resource>=<amount>]
///
/// Paths are relative to the script's directory. `#` lines are comments.
struct SessionScript {
  broker::State initial;
  std::vector<broker::Message> messages;
};

inline SessionScript load_session(const fs::path& script) {
  SessionScript out;
  std::istringstream in(read_file(script));
  const fs::path base = script.parent_path();
  std::string raw;
  std::size_t number = 0;
  auto fail = [&](const std::string& what) { throw Error(Errc::syntax_error, script.string() + ": " + what, number); };
  while (std::getline(in, raw)) {
    ++number;
    auto line = trim_view(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream words{std::string(line)};
    std::string head;
    words >> head;
    if (head == "CONTEXT" || head == "PROVIDER") {
      if (!out.messages.empty()) fail("setup directives must precede messages");
      if (head == "CONTEXT") {
        std::string path;
        if (!(words >> path)) fail("CONTEXT needs a model path");
        out.initial.context_model = load_model(base / path);
        continue;
      }
      std::string provider;
      if (!(words >> provider)) fail("PROVIDER needs an id");
      std::vector<ServiceOffer> offers;
      ResourceMap capacity;
      std::string tok;
      while (words >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + tok + "'");
        const std::string key = tok.substr(0, eq);
        const std::string value = tok.substr(eq + 1);
        if (key == "offer") {
          const fs::path file = base / value;
          ServiceOffer offer;
          offer.model = load_model(file);
          offer.service_id = offer.model.name;
          std::string stem = file.filename().string();
          if (ends_with(stem, ".fm.xml")) stem.resize(stem.size() - 7);
          if (auto product = file.parent_path() / (stem + ".product.xml"); fs::exists(product)) {
            offer.descriptor = parse_product(read_file(product));
          }
          offers.push_back(std::move(offer));
        } else if (key.rfind("cap.", 0) == 0 && key.size() > 4) {
          auto amount = parse_rational(value);
          if (!amount) fail("capacity '" + key + "' must be a number");
          capacity[key.substr(4)] = *amount;
        } else {
          fail("unknown PROVIDER key '" + key + "'");
        }
      }
      out.initial = broker::register_provider(std::move(out.initial), provider, std::move(offers), std::move(capacity));
      continue;
    }
    try {
      out.messages.push_back(broker::parse_message(line));
    } catch (const Error& e) {
      fail(e.what());
    }
  }
  return out;
}

inline std::string join_names(const Configuration& cfg, std::string_view sep = ",") {
  std::string out;
  for (const auto& name : cfg.selected) {
    if (!out.empty()) out += sep;
    out += name;
  }
  return out;
}

inline std::string format_result(const DerivationResult& r) {
  std::ostringstream out;
  out << "service = " << r.service_id << '\n'
      << "provider = " << r.provider_id << '\n'
      << "total_cost = " << format_rational(r.total_cost) << '\n'
      << "achieved_qoc = " << format_rational(r.achieved_qoc) << '\n'
      << "configuration = " << join_names(r.configuration, ", ") << '\n'
      << "[bound_properties]\n";
  for (const auto& p : r.bound_properties) out << p.name << " = " << p.value << '\n';
  return out.str();
}

inline std::set<std::string> load_selection(const fs::path& path) {
  const std::string text = read_file(path);
  std::set<std::string> names;
  if (ends_with(path.filename().string(), ".xml")) {
    for (const auto& entry : parse_product(text).features) names.insert(entry.name);
    return names;
  }
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto body = trim_view(line);
    if (body.empty() || body.front() == '#') continue;
    std::string token;
    for (char c : body) {
      if (c == ',' || c == ' ' || c == '\t') {
        if (!token.empty()) names.insert(std::exchange(token, {}));
      } else {
        token += c;
      }
    }
    if (!token.empty()) names.insert(token);
  }
  return names;
}

struct Options {
  std::string format = "text";
  std::string model;
  bool count = false;
  std::size_t limit = 100000;
  std::string context;
  std::string context_model;
  std::string requirements;
  std::string offers;
  std::string qoc_threshold = "0";
  std::string product_out;
  std::string script;
  std::string config;
  std::string in_dir;
  std::string out_dir;
};

inline int cmd_validate(const Options& o, std::ostream& out, std::ostream& err) {
  FeatureModel fm;
  try {
    fm = parse_feature_model(read_file(o.model));
  } catch (const Error& e) {
    if (e.code() != Errc::semantic_error) throw;
    for (const auto& me : e.model_errors()) out << to_string(me.category) << ' ' << me.feature << ": " << me.message << '\n';
    err << "error: " << e.what() << '\n';
    return 1;
  }
  if (o.format == "xml") {
    out << serialize_feature_model(fm);
  } else {
    out << "ok " << fm.name << ": " << feature_count(fm.root) << " features, " << fm.constraints.size()
        << " constraints\n";
  }
  return 0;
}

inline int cmd_products(const Options& o, std::ostream& out) {
  const FeatureModel fm = load_model(o.model);
  if (o.count) {
    out << count_products(fm) << '\n';
    return 0;
  }
  const auto list = enumerate_products(fm, o.limit);
  if (o.format == "xml") {
    out << "<products model=\"" << xml_detail::escape(fm.name, true) << "\" count=\"" << list.products.size()
        << "\" truncated=\"" << (list.truncated ? "true" : "false") << "\">\n";
    for (const auto& cfg : list.products) {
      out << "  <configuration>\n";
      for (const auto& name : cfg.selected) out << "    <feature name=\"" << xml_detail::escape(name, true) << "\"/>\n";
      out << "  </configuration>\n";
    }
    out << "</products>\n";
    return 0;
  }
  for (const auto& cfg : list.products) out << join_names(cfg) << '\n';
  if (list.truncated) out << "... truncated after " << list.products.size() << " products\n";
  return 0;
}

inline int cmd_derive(const Options& o, std::ostream& out) {
  auto threshold = parse_rational(o.qoc_threshold);
  if (!threshold || *threshold < 0) throw Error(Errc::invalid_argument, "--qoc-threshold must be a non-negative number");
  const auto ctx = parse_context_file(read_file(o.context));
  const auto reqs = parse_requirements_file(read_file(o.requirements));
  const auto context_model = load_model(o.context_model);
  const auto offers = load_offers(o.offers);

  const auto observations = snapshot_to_observations(ctx.snapshot, ctx.qoc);
  const auto result = derive(context_model, observations, offers, reqs, *threshold);
  const auto offer = std::find_if(offers.begin(), offers.end(),
                                  [&](const ServiceOffer& s) { return s.service_id == result.service_id; });
  const std::string product_xml = serialize_product(result.configuration, make_product_descriptor(*offer, result.configuration));

  if (!o.product_out.empty()) write_file(o.product_out, product_xml);
  if (o.format == "xml") {
    out << product_xml;
  } else {
    out << format_result(result);
    if (o.product_out.empty()) out << '\n' << product_xml;
  }
  return 0;
}

inline int cmd_broker_sim(const Options& o, std::ostream& out) {
  auto script = load_session(o.script);
  const auto session = broker::run_session(std::move(script.initial), script.messages);
  out << broker::format_trace(session.trace);
  return 0;
}

inline int cmd_preprocess(const Options& o, std::ostream& out) {
  const auto selected = load_selection(o.config);
  const fs::path in_dir = o.in_dir;
  const fs::path out_dir = o.out_dir;
  if (!fs::is_directory(in_dir)) throw Error(Errc::io_error, "'" + o.in_dir + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(in_dir)) {
    if (entry.is_regular_file()) files.push_back(fs::relative(entry.path(), in_dir));
  }
  std::sort(files.begin(), files.end());

  std::size_t written = 0;
  std::size_t skipped = 0;
  for (const auto& rel : files) {
    const std::string source = read_file(in_dir / rel);
    try {
      if (auto guard = file_guard(source); guard && !selected.count(*guard)) {
        out << "skip " << rel.generic_string() << " (" << *guard << " not selected)\n";
        ++skipped;
        continue;
      }
      write_file(out_dir / rel, preprocess(source, selected));
    } catch (const Error& e) {
      throw Error(e.code(), rel.generic_string() + ": " + e.what(), e.line());
    }
    out << "write " << rel.generic_string() << '\n';
    ++written;
  }
  out << written << " written, " << skipped << " skipped\n";
  return 0;
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Context-aware feature-model derivation and service brokering", "cafm"};
  app.require_subcommand(1);
  Options o;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text", "xml"}));
  };

  auto* validate = app.add_subcommand("validate", "Check a feature model");
  validate->add_option("model", o.model, "*.fm.xml file")->required();
  add_format(validate);

  auto* products = app.add_subcommand("products", "List or count valid products");
  products->add_option("model", o.model, "*.fm.xml file")->required();
  products->add_flag("--count", o.count, "Print the number of products only");
  products->add_option("--limit", o.limit, "Maximum number of products listed")->check(CLI::PositiveNumber);
  add_format(products);

  auto* derive_cmd = app.add_subcommand("derive", "Derive the cheapest context-aware service configuration");
  derive_cmd->add_option("--context", o.context, "Context snapshot file")->required();
  derive_cmd->add_option("--context-model", o.context_model, "Consumer context *.fm.xml")->required();
  derive_cmd->add_option("--requirements", o.requirements, "Requirements file")->required();
  derive_cmd->add_option("--offers", o.offers, "Directory of service offers")->required();
  derive_cmd->add_option("--qoc-threshold", o.qoc_threshold, "Minimum QoC the offer must provide");
  derive_cmd->add_option("--product-out", o.product_out, "Write the product descriptor XML here");
  add_format(derive_cmd);

  auto* sim = app.add_subcommand("broker-sim", "Run a scripted broker session and print its trace");
  sim->add_option("--script", o.script, "Session script")->required();
  sim->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"text"}));

  auto* pre = app.add_subcommand("preprocess", "Materialize a product from annotated sources");
  pre->add_option("--config", o.config, "Product descriptor XML or feature list")->required();
  pre->add_option("--in", o.in_dir, "Source directory")->required();
  pre->add_option("--out", o.out_dir, "Output directory")->required();
  add_format(pre);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(o, out, err);
    if (products->parsed()) return cmd_products(o, out);
    if (derive_cmd->parsed()) return cmd_derive(o, out);
    if (sim->parsed()) return cmd_broker_sim(o, out);
    if (pre->parsed()) return cmd_preprocess(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << to_string(Errc::io_error) << ": " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace cafm::cli

#endif  // CAFM_CLI_HPP
