#include <gtest/gtest.h>

#include <algorithm>

#include "cafm/analysis.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace cafm;

namespace {

FeatureModel model(Feature root, std::vector<CrossTreeConstraint> constraints = {}) {
  return FeatureModel{"M", std::move(root), std::move(constraints)};
}

std::set<std::set<std::string>> as_sets(const std::vector<Configuration>& cfgs) {
  std::set<std::set<std::string>> out;
  for (const auto& c : cfgs) out.insert(c.selected);
  return out;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::invalid_argument;
}

}  // namespace

TEST(ValidateModel, AcceptsWellFormedModel) {
  auto fm = model(mandatory("R", {mandatory("A"), optional("B", {member("X"), member("Y")}, GroupKind::or_group)}));
  EXPECT_TRUE(validate_model(fm).empty());
}

TEST(ValidateModel, ReportsEachCategory) {
  auto fm = model(mandatory("R", {mandatory("A"), optional("A"), mandatory("G", {member("Only")}, GroupKind::alternative),
                                  optional("bad name")}),
                  {{ConstraintKind::requires_feature, "A", "Ghost"}, {ConstraintKind::excludes_feature, "G", "G"}});
  fm.root.children[0].attributes["min_qoc"] = Rational(3, 2);
  fm.root.children[1].properties.push_back({"n", PropertyType::number, "ten"});
  std::set<ModelErrorCategory> seen;
  for (const auto& e : validate_model(fm)) seen.insert(e.category);
  EXPECT_EQ(seen, (std::set<ModelErrorCategory>{ModelErrorCategory::duplicate_name, ModelErrorCategory::undersized_group,
                                                ModelErrorCategory::dangling_constraint,
                                                ModelErrorCategory::bad_attribute_range, ModelErrorCategory::bad_name,
                                                ModelErrorCategory::bad_property_value}));
}

TEST(IsValidConfiguration, FodaRules) {
  auto fm = model(mandatory("R", {mandatory("A"), optional("B"), mandatory("G", {member("X"), member("Y")}, GroupKind::alternative)}),
                  {{ConstraintKind::requires_feature, "B", "Y"}});
  EXPECT_TRUE(is_valid_configuration(fm, {"R", "A", "G", "X"}));
  EXPECT_TRUE(is_valid_configuration(fm, {"R", "A", "B", "G", "Y"}));
  EXPECT_FALSE(is_valid_configuration(fm, {"R", "A", "B", "G", "X"}));  // requires
  EXPECT_FALSE(is_valid_configuration(fm, {"R", "G", "X"}));            // mandatory A missing
  EXPECT_FALSE(is_valid_configuration(fm, {"R", "A", "G", "X", "Y"}));  // two alternatives
  EXPECT_FALSE(is_valid_configuration(fm, {"R", "A", "G"}));            // none chosen
  EXPECT_FALSE(is_valid_configuration(fm, {"A", "G", "X"}));            // root missing
  EXPECT_EQ(code_of([&] { is_valid_configuration(fm, {"R", "Nope"}); }), Errc::unknown_feature);
}

TEST(IsValidConfiguration, ChildWithoutParentIsInvalid) {
  auto fm = model(mandatory("R", {optional("P", {optional("C")})}));
  EXPECT_FALSE(is_valid_configuration(fm, {"R", "C"}));
  EXPECT_TRUE(is_valid_configuration(fm, {"R", "P", "C"}));
}

TEST(EnumerateProducts, RootPlusOptional) {
  auto fm = model(mandatory("R", {optional("O")}));
  auto list = enumerate_products(fm, 10);
  ASSERT_EQ(list.products.size(), 2u);
  EXPECT_EQ(list.products[0], Configuration({"O", "R"}));
  EXPECT_EQ(list.products[1], Configuration({"R"}));
  EXPECT_FALSE(list.truncated);
  EXPECT_EQ(count_products(fm), 2u);
}

TEST(EnumerateProducts, CanonicalOrderIsSortedNameListOrder) {
  support::Rng rng(7);
  for (int i = 0; i < 60; ++i) {
    auto fm = support::random_model(rng, {.min_features = 2, .max_features = 10});
    auto list = enumerate_products(fm, 1u << 20);
    EXPECT_TRUE(std::is_sorted(list.products.begin(), list.products.end(),
                               [](const Configuration& a, const Configuration& b) {
                                 return std::lexicographical_compare(a.selected.begin(), a.selected.end(),
                                                                     b.selected.begin(), b.selected.end());
                               }));
    EXPECT_EQ(std::adjacent_find(list.products.begin(), list.products.end()), list.products.end());
  }
}

TEST(EnumerateProducts, LimitTruncates) {
  auto fm = model(mandatory("R", {optional("A"), optional("B"), optional("C")}));
  auto all = enumerate_products(fm, 100);
  auto some = enumerate_products(fm, 3);
  ASSERT_EQ(all.products.size(), 8u);
  EXPECT_TRUE(some.truncated);
  EXPECT_EQ(some.products, std::vector<Configuration>(all.products.begin(), all.products.begin() + 3));
  EXPECT_EQ(code_of([&] { enumerate_products(fm, 0); }), Errc::invalid_argument);
}

TEST(EnumerateProducts, TooLarge) {
  std::vector<Feature> kids;
  for (int i = 0; i < 24; ++i) kids.push_back(optional("O" + std::to_string(i)));
  auto fm = model(mandatory("R", kids));
  EXPECT_EQ(code_of([&] { enumerate_products(fm, 1); }), Errc::too_large);
  EXPECT_EQ(code_of([&] { count_products(fm); }), Errc::too_large);
  kids.pop_back();
  EXPECT_EQ(count_products(model(mandatory("R", kids))), std::uint64_t{1} << 23);
}

TEST(EnumerateProducts, MatchesBruteForceOracle) {
  support::Rng rng(2024);
  for (int i = 0; i < 150; ++i) {
    auto fm = support::random_model(rng, {.min_features = 1, .max_features = 11});
    ASSERT_TRUE(validate_model(fm).empty());
    const auto expected = oracle::brute_force_products(fm);
    EXPECT_EQ(as_sets(enumerate_products(fm, 1u << 20).products), expected) << "model " << i;
    EXPECT_EQ(count_products(fm), expected.size());
  }
}

TEST(IsValidConfiguration, AgreesWithOracleOnEverySubset) {
  support::Rng rng(99);
  for (int i = 0; i < 40; ++i) {
    auto fm = support::random_model(rng, {.min_features = 1, .max_features = 9});
    auto flat = oracle::flatten(fm);
    const std::size_t n = flat.nodes.size();
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << n); ++m) {
      std::vector<bool> on(n);
      Configuration cfg;
      for (std::size_t k = 0; k < n; ++k) {
        on[k] = (m >> k) & 1u;
        if (on[k]) cfg.selected.insert(flat.nodes[k]->name);
      }
      ASSERT_EQ(is_valid_configuration(fm, cfg), oracle::valid(fm, flat, on)) << "model " << i << " mask " << m;
    }
  }
}

TEST(Counting, GroupIdentities) {
  for (int k = 2; k <= 6; ++k) {
    std::vector<Feature> members;
    for (int i = 0; i < k; ++i) members.push_back(member("C" + std::to_string(i)));
    EXPECT_EQ(count_products(model(mandatory("R", members, GroupKind::alternative))), static_cast<std::uint64_t>(k));
    EXPECT_EQ(count_products(model(mandatory("R", members, GroupKind::or_group))), (std::uint64_t{1} << k) - 1);
    EXPECT_EQ(count_products(model(mandatory("R", members))), std::uint64_t{1} << k);
  }
}

TEST(ResolveRequirements, SelectsPathToRoot) {
  auto fm = model(mandatory("R", {mandatory("Res", {mandatory("M", {member("Small"), member("Big")}, GroupKind::alternative)})}));
  EXPECT_EQ(resolve_requirements(fm, {{"M", "Small"}}), Configuration({"R", "Res", "M", "Small"}));
  EXPECT_EQ(resolve_requirements(fm, {}), Configuration({"R"}));
  EXPECT_EQ(code_of([&] { resolve_requirements(fm, {{"Nope", "Small"}}); }), Errc::no_such_feature);
  EXPECT_EQ(code_of([&] { resolve_requirements(fm, {{"M", "Huge"}}); }), Errc::no_such_value);
  EXPECT_EQ(code_of([&] { resolve_requirements(fm, {{"R", "Small"}}); }), Errc::no_such_value);
}

TEST(CompleteConfiguration, EqualsFilteredEnumeration) {
  support::Rng rng(31337);
  for (int i = 0; i < 120; ++i) {
    auto fm = support::random_model(rng, {.min_features = 2, .max_features = 10});
    auto flat = oracle::flatten(fm);
    Configuration partial;
    for (const auto* f : flat.nodes) {
      if (support::coin(rng, 0.25)) partial.selected.insert(f->name);
    }
    std::vector<Configuration> expected;
    for (const auto& p : enumerate_products(fm, 1u << 20).products) {
      if (std::includes(p.selected.begin(), p.selected.end(), partial.selected.begin(), partial.selected.end())) {
        expected.push_back(p);
      }
    }
    EXPECT_EQ(complete_configuration(fm, partial), expected) << "model " << i;
  }
}

TEST(CompleteConfiguration, ConflictingPartialIsEmpty) {
  auto fm = model(mandatory("R", {mandatory("G", {member("X"), member("Y")}, GroupKind::alternative), optional("A"), optional("B")}),
                  {{ConstraintKind::excludes_feature, "A", "B"}});
  EXPECT_TRUE(complete_configuration(fm, {"X", "Y"}).empty());
  EXPECT_TRUE(complete_configuration(fm, {"A", "B"}).empty());
  EXPECT_EQ(complete_configuration(fm, {"A", "X"}).size(), 1u);
}
