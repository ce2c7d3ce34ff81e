#include <gtest/gtest.h>

#include <algorithm>

#include "atlasburst/anatomy.hpp"
#include "atlasburst/fixtures.hpp"
#include "support/data.hpp"
#include "support/oracles.hpp"
#include "support/random_tree.hpp"

using namespace atlasburst;
using testing_support::id;
using testing_support::mini;

namespace {

std::string doc(const std::string& structures, const std::string& root = "EMAPA:1") {
  return R"({"format":"atlasburst-anatomy/1","root":")" + root + R"(","structures":[)" + structures + "]}";
}

ValidationReport report_for(const std::string& text) { return validate_anatomy(read_anatomy_document(text)); }

std::string expect_anatomy_error(const std::string& text) {
  try {
    parse_anatomy(text);
  } catch (const AnatomyError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no AnatomyError";
  return {};
}

}  // namespace

TEST(ParseAnatomy, HeartAliasesResolveToOneAbstractId) {
  const auto& a = mini().anatomy;
  EXPECT_EQ(a.resolve_alias(id("EMAP:315")), id("EMAPA:16105"));
  EXPECT_EQ(a.resolve_alias(id("EMAP:2411")), id("EMAPA:16105"));
  EXPECT_EQ(resolve_alias(a, id("EMAP:315")), resolve_alias(a, id("EMAP:2411")));
  EXPECT_EQ(a.structure(id("EMAPA:16105")).name, "heart");
}

TEST(ParseAnatomy, UnknownAliasIsNotFound) {
  EXPECT_THROW(mini().anatomy.resolve_alias(id("EMAP:999999")), NotFound);
  EXPECT_THROW(mini().anatomy.resolve_alias(id("EMAPA:16105")), InvalidArgument);
}

TEST(ParseAnatomy, RootOnlyAnatomy) {
  auto a = parse_anatomy(doc(R"({"id":"EMAPA:1","name":"mouse","stages":[1]})"));
  EXPECT_EQ(a.size(), 1u);
  EXPECT_EQ(a.abstract_view().size(), 1u);
  EXPECT_EQ(a.staged_view(Stage(1)).size(), 1u);
  EXPECT_EQ(a.staged_view(Stage(2)).size(), 0u);
  EXPECT_EQ(descendant_count(a.abstract_view(), id("EMAPA:1")), 0u);
}

TEST(ParseAnatomy, CycleIsRejected) {
  auto text = doc(R"({"id":"EMAPA:1","name":"root","stages":[1]},
                     {"id":"EMAPA:2","name":"A","parent":"EMAPA:3","stages":[1]},
                     {"id":"EMAPA:3","name":"B","parent":"EMAPA:2","stages":[1]})");
  EXPECT_EQ(expect_anatomy_error(text), "CYCLE");
  auto report = report_for(text);
  ASSERT_EQ(report.error_count(), 1u);
  EXPECT_EQ(report.findings[0].structure, id("EMAPA:2"));
}

TEST(ParseAnatomy, SyntaxErrorReportsLineAndOffset) {
  try {
    parse_anatomy("{\"format\":\"atlasburst-anatomy/1\",\n\"root\": ,}");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.code(), "syntax");
    EXPECT_EQ(e.line(), 2u);
    EXPECT_GT(e.column(), 0u);
  }
}

TEST(ParseAnatomy, SchemaErrors) {
  auto code_of = [](const std::string& text) {
    try {
      read_anatomy_document(text);
    } catch (const ParseError& e) {
      return e.code();
    }
    return std::string("none");
  };
  EXPECT_EQ(code_of(R"({"format":"other","root":"EMAPA:1","structures":[]})"), "schema");
  EXPECT_EQ(code_of(doc(R"({"id":"EMAPA:1","name":"m","stages":[27]})")), "stage_out_of_range");
  EXPECT_EQ(code_of(doc(R"({"id":"EMAPA:1","name":"m","stages":["0-3"]})")), "stage_out_of_range");
  EXPECT_EQ(code_of(doc(R"({"id":"EMAP:1","name":"m","stages":[1]})")), "bad_id");
  EXPECT_EQ(code_of(doc(R"({"id":"EMAPA:1","name":"","stages":[1]})")), "schema");
  EXPECT_EQ(code_of(doc(R"({"id":"EMAPA:1","name":"m","stages":["5-3"]})")), "schema");
}

TEST(ParseAnatomy, UnknownKeysStrictVersusLenient) {
  auto text = doc(R"({"id":"EMAPA:1","name":"m","stages":[1],"colour":"red"})");
  EXPECT_THROW(read_anatomy_document(text), ParseError);
  ParseOptions lenient;
  lenient.strict = false;
  auto d = read_anatomy_document(text, lenient);
  ASSERT_EQ(d.warnings.size(), 1u);
  EXPECT_NE(d.warnings[0].find("colour"), std::string::npos);
}

TEST(ParseAnatomy, IntervalsExpandAndMixWithIntegers) {
  auto d = read_anatomy_document(doc(R"({"id":"EMAPA:1","name":"m","stages":["3-5",9,"11-11"]})"));
  const auto& s = d.structures[0].stages;
  EXPECT_EQ(s.size(), 5);
  for (int v : {3, 4, 5, 9, 11}) EXPECT_TRUE(s.contains(Stage(v)));
}

TEST(ValidateAnatomy, ValidFixtureHasEmptyReport) {
  EXPECT_TRUE(validate_anatomy(mini().anatomy).empty());
}

TEST(ValidateAnatomy, AliasStageMismatch) {
  auto r = report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":["1-5"],"aliases":{"7":"EMAP:9"}})"));
  EXPECT_TRUE(r.has_rule("ALIAS_STAGE_MISMATCH"));
  EXPECT_EQ(r.findings[0].structure, id("EMAPA:1"));
}

TEST(ValidateAnatomy, DuplicateSiblingNamesIgnoreCase) {
  auto r = report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                             {"id":"EMAPA:2","name":"Heart","parent":"EMAPA:1","stages":[1]},
                             {"id":"EMAPA:3","name":"heart","parent":"EMAPA:1","stages":[1]})"));
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].rule, "DUP_SIBLING_NAME");
  // Same name under different parents is fine.
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                                {"id":"EMAPA:2","name":"a","parent":"EMAPA:1","stages":[1]},
                                {"id":"EMAPA:3","name":"b","parent":"EMAPA:1","stages":[1]},
                                {"id":"EMAPA:4","name":"wall","parent":"EMAPA:2","stages":[1]},
                                {"id":"EMAPA:5","name":"wall","parent":"EMAPA:3","stages":[1]})"))
                  .empty());
}

TEST(ValidateAnatomy, StructuralRules) {
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},{"id":"EMAPA:1","name":"n","stages":[1]})"))
                  .has_rule("DUPLICATE_ID"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:2","name":"m","stages":[1]})")).has_rule("MISSING_ROOT"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1],"parent":"EMAPA:1"})"))
                  .has_rule("ROOT_HAS_PARENT"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},{"id":"EMAPA:2","name":"n","stages":[1]})"))
                  .has_rule("NO_PARENT"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                                {"id":"EMAPA:2","name":"n","parent":"EMAPA:7","stages":[1]})"))
                  .has_rule("MISSING_PARENT"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[]})")).has_rule("EMPTY_STAGES"));
  EXPECT_TRUE(report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":["1-26"],"aliases":{"1":"EMAP:5"}},
                                {"id":"EMAPA:2","name":"n","parent":"EMAPA:1","stages":[2],"aliases":{"2":"EMAP:5"}})"))
                  .has_rule("ALIAS_CONFLICT"));
}

TEST(ValidateAnatomy, OrphanAtStageIsRejected) {
  auto text = doc(R"({"id":"EMAPA:1","name":"m","stages":["1-26"]},
                     {"id":"EMAPA:2","name":"p","parent":"EMAPA:1","stages":["10-20"]},
                     {"id":"EMAPA:3","name":"c","parent":"EMAPA:2","stages":["15-22"]})");
  EXPECT_EQ(expect_anatomy_error(text), "ORPHAN_AT_STAGE");
}

TEST(ValidateAnatomy, UnknownIsaTargetIsOnlyAWarning) {
  auto text = doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                     {"id":"EMAPA:2","name":"n","parent":"EMAPA:1","stages":[1],"isa":["EMAPA:77"]})");
  auto r = report_for(text);
  ASSERT_EQ(r.findings.size(), 1u);
  EXPECT_EQ(r.findings[0].severity, Severity::warning);
  EXPECT_EQ(r.findings[0].rule, "ISA_UNKNOWN");
  auto a = parse_anatomy(text);
  EXPECT_EQ(a.warnings().size(), 1u);
}

TEST(ValidateAnatomy, FindingsSortedByStructureThenRule) {
  auto r = report_for(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                             {"id":"EMAPA:9","name":"z","parent":"EMAPA:1","stages":[2],"aliases":{"5":"EMAP:1"}},
                             {"id":"EMAPA:3","name":"y","parent":"EMAPA:44","stages":[1]})"));
  ASSERT_GE(r.findings.size(), 3u);
  for (std::size_t i = 1; i < r.findings.size(); ++i) {
    auto a = r.findings[i - 1].structure->number, b = r.findings[i].structure->number;
    EXPECT_TRUE(a < b || (a == b && r.findings[i - 1].rule <= r.findings[i].rule));
  }
}

TEST(StagedView, FirstStageOfTheMiniAtlasHasFiveStructures) {
  const auto& v = mini().anatomy.staged_view(Stage(1));
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v[0].id, id("EMAPA:25765"));
  EXPECT_EQ(descendant_count(v, id("EMAPA:25765")), 4u);
}

TEST(StagedView, ExcludesStructuresOutsideTheirStages) {
  const auto& a = mini().anatomy;
  EXPECT_FALSE(a.staged_view(Stage(12)).find(id("EMAPA:17001")));  // digit: 16-26
  EXPECT_TRUE(a.staged_view(Stage(16)).find(id("EMAPA:17001")));
  EXPECT_EQ(a.abstract_view().size(), a.size());
  EXPECT_FALSE(a.abstract_view().stage());
  EXPECT_EQ(a.staged_view(Stage(9)).stage(), Stage(9));
}

TEST(StagedView, SiblingOrderIsCaseInsensitiveNameThenId) {
  auto a = parse_anatomy(doc(R"({"id":"EMAPA:1","name":"m","stages":[1]},
                                {"id":"EMAPA:5","name":"beta","parent":"EMAPA:1","stages":[1]},
                                {"id":"EMAPA:4","name":"Alpha","parent":"EMAPA:1","stages":[1]},
                                {"id":"EMAPA:3","name":"alpha","parent":"EMAPA:4","stages":[1]},
                                {"id":"EMAPA:2","name":"Gamma","parent":"EMAPA:1","stages":[1]})"));
  auto ids = a.abstract_view().ids();
  std::vector<StructureId> expected{id("EMAPA:1"), id("EMAPA:4"), id("EMAPA:3"), id("EMAPA:5"), id("EMAPA:2")};
  EXPECT_EQ(ids, expected);
}

TEST(AnatomyWriter, RoundTripsThroughText) {
  auto text = write_anatomy_document(mini().anatomy.to_document());
  auto again = parse_anatomy(text);
  EXPECT_EQ(again.abstract_view().ids(), mini().anatomy.abstract_view().ids());
  EXPECT_EQ(write_anatomy_document(again.to_document()), text);
}

// Generated trees: views agree with brute-force oracles.
TEST(AnatomyProperties, ViewsMatchOraclesOnRandomTrees) {
  testing_support::Rng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    testing_support::TreeShape shape;
    shape.nodes = rng.between(1, 120);
    auto a = testing_support::random_anatomy(rng, shape);
    const auto& full = a.abstract_view();
    ASSERT_EQ(full.size(), a.size());

    // Tree property: one root, edges == nodes - 1, parents precede children.
    std::size_t edges = 0;
    for (std::size_t i = 0; i < full.size(); ++i) {
      if (full[i].parent >= 0) {
        ++edges;
        ASSERT_LT(full[i].parent, static_cast<int>(i));
        ASSERT_EQ(full[i].depth, full[static_cast<std::size_t>(full[i].parent)].depth + 1);
      }
    }
    ASSERT_EQ(edges + 1, full.size());

    auto all = testing_support::oracle_members(a, std::nullopt);
    for (std::size_t i = 0; i < full.size(); ++i) {
      ASSERT_EQ(full.descendant_count(i), testing_support::oracle_descendants(a, all, full[i].id));
      std::size_t sum = 0;
      full.for_each_child(i, [&](std::size_t c) { sum += 1 + full.descendant_count(c); });
      ASSERT_EQ(full.descendant_count(i), sum);
    }

    auto full_ids = full.ids();
    for (int s = kMinStage; s <= kMaxStage; ++s) {
      const auto& v = a.staged_view(Stage(s));
      auto members = testing_support::oracle_members(a, Stage(s));
      ASSERT_EQ(v.size(), members.size());
      // Subsequence of the abstract order.
      auto ids = v.ids();
      auto it = full_ids.begin();
      for (const auto& x : ids) {
        it = std::find(it, full_ids.end(), x);
        ASSERT_NE(it, full_ids.end());
      }
      for (std::size_t i = 0; i < v.size(); ++i)
        ASSERT_EQ(v.descendant_count(i), testing_support::oracle_descendants(a, members, v[i].id));
    }
  }
}

TEST(AnatomyProperties, AliasesAreInjectivePerStage) {
  auto files = generate_fixtures({300, 5, 26, 2.0, 11});
  auto a = parse_anatomy(files.anatomy);
  for (int s = kMinStage; s <= kMaxStage; ++s) {
    std::set<std::uint32_t> seen;
    for (const auto& st : a.structures()) {
      auto it = st.aliases.find(s);
      if (it == st.aliases.end()) continue;
      EXPECT_TRUE(seen.insert(it->second.number).second);
      EXPECT_EQ(a.resolve_alias(it->second), st.id);
    }
  }
}
