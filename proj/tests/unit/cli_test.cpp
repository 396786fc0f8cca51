#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "cafm/cli.hpp"
#include "support/fixtures.hpp"

using cafm::support::fixture;
using cafm::support::slurp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int status;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int status = cafm::cli::run(args, out, err);
  return {status, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("cafm_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::vector<std::string> derive_args() {
  return {"derive",        "--context",     fixture("consumer.ctx").string(), "--context-model",
          fixture("cc_spl.fm.xml").string(), "--requirements", fixture("case_study.reqs").string(),
          "--offers",      fixture("offers").string()};
}

}  // namespace

TEST(Cli, CountRootPlusOptional) {
  auto r = run({"products", fixture("root-plus-optional.fm.xml").string(), "--count"});
  EXPECT_EQ(r.status, 0);
  EXPECT_EQ(r.out, "2\n");
}

TEST(Cli, ProductsListAndXml) {
  auto text = run({"products", fixture("root-plus-optional.fm.xml").string()});
  EXPECT_EQ(text.out, "Extra,Root\nRoot\n");
  auto xml = run({"products", fixture("root-plus-optional.fm.xml").string(), "--format=xml"});
  EXPECT_EQ(xml.status, 0);
  EXPECT_NE(xml.out.find("<products model=\"RootPlusOptional\" count=\"2\""), std::string::npos);
  auto limited = run({"products", fixture("cc_spl.fm.xml").string(), "--limit", "5"});
  EXPECT_NE(limited.out.find("truncated after 5"), std::string::npos);
}

TEST(Cli, Validate) {
  auto ok = run({"validate", fixture("cc_spl.fm.xml").string()});
  EXPECT_EQ(ok.status, 0);
  EXPECT_EQ(ok.out, "ok CC_SPL: 19 features, 0 constraints\n");
  auto canonical = run({"validate", fixture("cc_spl.fm.xml").string(), "--format=xml"});
  EXPECT_EQ(canonical.out, cafm::serialize_feature_model(cafm::parse_feature_model(slurp(fixture("cc_spl.fm.xml")))));

  const auto dir = scratch("validate");
  std::ofstream(dir / "bad.fm.xml") << "<featureModel name=\"B\"><feature name=\"R\"><feature name=\"R\"/></feature>"
                                       "<constraints><excludes from=\"R\" to=\"Q\"/></constraints></featureModel>";
  auto bad = run({"validate", (dir / "bad.fm.xml").string()});
  EXPECT_EQ(bad.status, 1);
  EXPECT_NE(bad.out.find("duplicate-name R"), std::string::npos);
  EXPECT_NE(bad.out.find("dangling-constraint"), std::string::npos);
  EXPECT_NE(bad.err.find("semantic-error"), std::string::npos);
}

TEST(Cli, DeriveCaseStudy) {
  const auto dir = scratch("derive");
  auto args = derive_args();
  args.push_back("--product-out");
  args.push_back((dir / "product.xml").string());
  auto r = run(args);
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("unit = Euro/hour"), std::string::npos);
  EXPECT_NE(r.out.find("ram = SmallRam"), std::string::npos);
  EXPECT_NE(r.out.find("service = CSC_SPL"), std::string::npos);
  const auto pd = cafm::parse_product(slurp(dir / "product.xml"));
  ASSERT_NE(pd.find("Geolocation"), nullptr);
  EXPECT_EQ(pd.find("Geolocation")->pointcuts.at(0).name, "GeoPointcut");

  auto xml_args = derive_args();
  xml_args.push_back("--format=xml");
  auto xml = run(xml_args);
  EXPECT_EQ(xml.out, slurp(dir / "product.xml"));
}

TEST(Cli, DeriveDomainErrors) {
  auto args = derive_args();
  args.push_back("--qoc-threshold");
  args.push_back("0.95");
  auto r = run(args);
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("qoc-unsatisfiable"), std::string::npos);
  EXPECT_TRUE(r.out.empty());

  auto missing = derive_args();
  missing[8] = fixture("no-such-dir").string();
  auto io = run(missing);
  EXPECT_EQ(io.status, 1);
  EXPECT_NE(io.err.find("io-error"), std::string::npos);
}

TEST(Cli, BrokerSimGolden) {
  auto r = run({"broker-sim", "--script", fixture("protocol.session").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, slurp(fixture("protocol.trace")));
  std::size_t sends = 0;
  std::size_t requests = 0;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) {
    if (line.find(" GetContextAwareService ") != std::string::npos) {
      ++requests;
      const bool answered = line.find("SendContextAwareService broker") != std::string::npos ||
                            line.find("ErrorReply broker") != std::string::npos;
      EXPECT_TRUE(answered) << line;
      if (line.find("SendContextAwareService broker") != std::string::npos) ++sends;
    }
  }
  EXPECT_EQ(requests, 4u);
  EXPECT_EQ(sends, 3u);
}

TEST(Cli, BrokerSimScriptErrors) {
  const auto dir = scratch("session");
  std::ofstream(dir / "late.session") << "FindServiceContext a service=S\nCONTEXT x.fm.xml\n";
  auto late = run({"broker-sim", "--script", (dir / "late.session").string()});
  EXPECT_EQ(late.status, 1);
  EXPECT_NE(late.err.find("syntax-error (line 2)"), std::string::npos);
  std::ofstream(dir / "junk.session") << "Hello world\n";
  EXPECT_EQ(run({"broker-sim", "--script", (dir / "junk.session").string()}).status, 1);
  EXPECT_EQ(run({"broker-sim", "--script", (dir / "junk.session").string(), "--format=xml"}).status, 2);
}

TEST(Cli, PreprocessTree) {
  const auto out = scratch("preprocess");
  auto r = run({"preprocess", "--config", fixture("small.features").string(), "--in",
                fixture("preprocess_src").string(), "--out", out.string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(out / "security" / "MachineSeize.java"), slurp(fixture("machine_seize/expected_small.java")));
  EXPECT_TRUE(fs::exists(out / "security" / "MachineSmall.java"));
  EXPECT_FALSE(fs::exists(out / "security" / "MachineBig.java"));
  EXPECT_NE(slurp(out / "GeoLocator.java").find("Euro/hour"), std::string::npos);
  EXPECT_EQ(slurp(out / "GeoLocator.java").find("Dollar/hour"), std::string::npos);
  EXPECT_NE(r.out.find("skip security/MachineBig.java (Big not selected)"), std::string::npos);
  EXPECT_NE(r.out.find("3 written, 1 skipped"), std::string::npos);
}

TEST(Cli, PreprocessWithProductDescriptor) {
  const auto dir = scratch("preprocess_pd");
  auto args = derive_args();
  args.push_back("--product-out");
  args.push_back((dir / "product.xml").string());
  ASSERT_EQ(run(args).status, 0);
  auto r = run({"preprocess", "--config", (dir / "product.xml").string(), "--in", fixture("preprocess_src").string(),
                "--out", (dir / "out").string()});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(slurp(dir / "out" / "security" / "MachineSeize.java"), slurp(fixture("machine_seize/expected_small.java")));
}

TEST(Cli, PreprocessReportsUnbalancedSource) {
  const auto dir = scratch("preprocess_bad");
  fs::create_directories(dir / "in");
  std::ofstream(dir / "in" / "x.java") << "a\n//#endif\n";
  auto r = run({"preprocess", "--config", fixture("small.features").string(), "--in", (dir / "in").string(), "--out",
                (dir / "out").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("unbalanced-endif (line 2)"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).status, 2);
  EXPECT_EQ(run({"frobnicate"}).status, 2);
  EXPECT_EQ(run({"products"}).status, 2);
  EXPECT_EQ(run({"derive", "--context", "x"}).status, 2);
  EXPECT_EQ(run({"products", fixture("cc_spl.fm.xml").string(), "--format=json"}).status, 2);
  EXPECT_EQ(run({"products", fixture("cc_spl.fm.xml").string(), "--limit", "0"}).status, 2);
  auto help = run({"--help"});
  EXPECT_EQ(help.status, 0);
  EXPECT_NE(help.out.find("broker-sim"), std::string::npos);
}

TEST(Cli, MissingFileIsDomainError) {
  auto r = run({"validate", fixture("nope.fm.xml").string()});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("io-error"), std::string::npos);
}
