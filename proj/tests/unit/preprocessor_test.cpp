#include <gtest/gtest.h>

#include "cafm/preprocessor.hpp"
#include "support/fixtures.hpp"
#include "support/generators.hpp"

using namespace cafm;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size() - 1;
    out.push_back(text.substr(start, nl - start + 1));
    start = nl + 1;
  }
  return out;
}

bool is_subsequence(const std::vector<std::string>& small, const std::vector<std::string>& big) {
  std::size_t j = 0;
  for (const auto& s : big) {
    if (j < small.size() && small[j] == s) ++j;
  }
  return j == small.size();
}

std::size_t error_line(const std::string& src, Errc expected) {
  try {
    scan_directives(src);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expected) << src;
    return e.line();
  }
  ADD_FAILURE() << "no error for " << src;
  return 0;
}

}  // namespace

TEST(Preprocessor, MachineSeizeDirectives) {
  const auto src = support::slurp(support::fixture("machine_seize/MachineSeize.java"));
  std::vector<std::size_t> directive_lines;
  for (const auto& d : scan_directives(src)) {
    if (d.kind != DirectiveKind::plain) directive_lines.push_back(d.line_number);
  }
  EXPECT_EQ(directive_lines, (std::vector<std::size_t>{9, 11, 13, 15}));
}

TEST(Preprocessor, MachineSeizeGolden) {
  const auto src = support::slurp(support::fixture("machine_seize/MachineSeize.java"));
  const auto small = preprocess(src, {"Small"});
  const auto big = preprocess(src, {"Big"});
  EXPECT_EQ(small, support::slurp(support::fixture("machine_seize/expected_small.java")));
  EXPECT_EQ(big, support::slurp(support::fixture("machine_seize/expected_big.java")));
  EXPECT_NE(small.find("returnValue=MachineSmall.getPrice();"), std::string::npos);
  EXPECT_EQ(small.find("MachineBig"), std::string::npos);
  EXPECT_NE(big.find("returnValue= MachineBig.getPrice();"), std::string::npos);
  EXPECT_EQ(big.find("MachineSmall"), std::string::npos);
}

TEST(Preprocessor, BalanceErrorsCarryLines) {
  EXPECT_EQ(error_line("//#endif\n", Errc::unbalanced_endif), 1u);
  EXPECT_EQ(error_line("a\n//#if A\nb\n", Errc::unterminated_if), 2u);
  EXPECT_EQ(error_line("a\nb\n//#else\n", Errc::else_without_if), 3u);
  EXPECT_EQ(error_line("//#if A\n//#else\n//#else\n//#endif\n", Errc::else_without_if), 3u);
  EXPECT_EQ(error_line("x\n  //#if\n//#endif\n", Errc::malformed_directive), 2u);
  EXPECT_THROW(preprocess("//#endif\n", {}), Error);
}

TEST(Preprocessor, DirectiveFreeTextIsIdentity) {
  const std::string src = "int a;\n  // #if Nope is not a directive\nx = \"//#if\";\nno newline at end";
  for (const auto& d : scan_directives(src)) EXPECT_EQ(d.kind, DirectiveKind::plain);
  EXPECT_EQ(preprocess(src, {}), src);
  EXPECT_EQ(preprocess(src, {"A", "B"}), src);
}

TEST(Preprocessor, ElseAndNesting) {
  const std::string src =
      "top\n//#if A\na\n  //#if B\n  ab\n  //#else\n  a-not-b\n  //#endif\n//#else\nnot-a\n//#endif\nend\n";
  EXPECT_EQ(preprocess(src, {"A", "B"}), "top\na\n  ab\nend\n");
  EXPECT_EQ(preprocess(src, {"A"}), "top\na\n  a-not-b\nend\n");
  EXPECT_EQ(preprocess(src, {"B"}), "top\nnot-a\nend\n");
  EXPECT_EQ(preprocess(src, {}), "top\nnot-a\nend\n");
}

TEST(Preprocessor, PreservesBytes) {
  const std::string src = "\t\tindented\r\n//#if A\r\n  crlf kept\r\n//#endif\r\n";
  EXPECT_EQ(preprocess(src, {"A"}), "\t\tindented\r\n  crlf kept\r\n");
}

TEST(Preprocessor, RandomTextProperties) {
  support::Rng rng(10);
  const std::vector<std::string> features{"A", "B", "C"};
  for (int i = 0; i < 300; ++i) {
    const auto src = support::random_annotated_text(rng, features);
    std::set<std::string> selected;
    for (const auto& f : features) {
      if (support::coin(rng)) selected.insert(f);
    }
    const auto once = preprocess(src, selected);
    EXPECT_EQ(preprocess(once, selected), once);

    std::vector<std::string> plain;
    for (const auto& d : scan_directives(src)) {
      if (d.kind == DirectiveKind::plain) plain.push_back(d.raw);
    }
    EXPECT_TRUE(is_subsequence(lines_of(once), plain)) << src;

    // Complement: under all features vs none, each plain line of an else-free
    // source appears exactly when its guards hold; with all selected the
    // output is the source minus directive lines.
    if (src.find("//#else") == std::string::npos) {
      std::string expected;
      for (const auto& p : plain) expected += p;
      EXPECT_EQ(preprocess(src, {"A", "B", "C"}), expected);
    }
  }
}

TEST(Preprocessor, ComplementaryBlocks) {
  support::Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    std::string then_part;
    std::string else_part;
    for (int k = support::uniform(rng, 0, 5); k > 0; --k) then_part += "t" + std::to_string(k) + "\n";
    for (int k = support::uniform(rng, 0, 5); k > 0; --k) else_part += "e" + std::to_string(k) + "\n";
    const std::string src = "//#if F\n" + then_part + "//#else\n" + else_part + "//#endif\n";
    EXPECT_EQ(preprocess(src, {"F"}), then_part);
    EXPECT_EQ(preprocess(src, {}), else_part);
  }
}

TEST(Preprocessor, FileGuard) {
  EXPECT_EQ(file_guard("//#if Big\nclass X {}\n//#endif\n"), std::optional<std::string>("Big"));
  EXPECT_EQ(file_guard("  //#if Big"), std::optional<std::string>("Big"));
  EXPECT_EQ(file_guard("class X {}\n//#if Big\n"), std::nullopt);
  EXPECT_EQ(file_guard(""), std::nullopt);
}
