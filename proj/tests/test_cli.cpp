#include <gtest/gtest.h>
#include <expat.h>

#include <cstdlib>
#include <fstream>
#include <filesystem>
#include <sstream>

#include "atlasburst/cli.hpp"
#include "atlasburst/expression.hpp"
#include "support/data.hpp"

using namespace atlasburst;
using testing_support::mini;

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kMini = testing_support::data_path("mini");

bool well_formed(const std::string& xml) {
  XML_Parser p = XML_ParserCreate("UTF-8");
  bool ok = XML_Parse(p, xml.data(), static_cast<int>(xml.size()), 1) == XML_STATUS_OK;
  XML_ParserFree(p);
  return ok;
}

fs::path temp(const std::string& name) {
  auto p = fs::temp_directory_path() / ("atlasburst-cli-" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

TEST(Cli, ValidateCleanData) {
  auto r = run({"validate", "--data", kMini});
  EXPECT_EQ(r.code, cli::kExitOk) << r.out << r.err;
  EXPECT_EQ(r.out, "0 findings\n");
}

TEST(Cli, ValidateReportsFindings) {
  auto dir = temp("validate");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "anatomy.json") << R"({"format":"atlasburst-anatomy/1","root":"EMAPA:1","structures":[
      {"id":"EMAPA:1","name":"r","stages":[1]},
      {"id":"EMAPA:2","name":"late","parent":"EMAPA:1","stages":[5]}]})";
    std::ofstream(dir / "annotations.jsonl") << "";
  }
  auto r = run({"validate", "--data", dir.string()});
  EXPECT_EQ(r.code, cli::kExitFindings);
  EXPECT_NE(r.out.find("ORPHAN_AT_STAGE"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("annotations not checked"), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, RenderSvgToFile) {
  auto dir = temp("render");
  fs::create_directories(dir);
  auto file = (dir / "shh.svg").string();
  auto r = run({"render", "--data", kMini, "--gene", "Shh", "--stage", "17", "-o", file});
  ASSERT_EQ(r.code, 0) << r.err;
  auto svg = testing_support::read_file(file);
  EXPECT_TRUE(well_formed(svg));
  EXPECT_NE(svg.find("data-id=\"EMAPA:17001\" data-state=\"strong\""), std::string::npos);
  fs::remove_all(dir);
}

TEST(Cli, RenderGridAndJsonToStdout) {
  auto grid = run({"render", "--data", kMini, "--genes", "gA,gB", "--stages", "17", "--size", "120"});
  ASSERT_EQ(grid.code, 0) << grid.err;
  EXPECT_TRUE(well_formed(grid.out));
  EXPECT_NE(grid.out.find("data-cell=\"1\""), std::string::npos);
  auto json = run({"render", "--data", kMini, "--gene", "Shh", "--stage", "17", "--format", "json", "-o", "-"});
  ASSERT_EQ(json.code, 0);
  EXPECT_EQ(json.out.rfind(R"({"title":"Shh @ TS17")", 0), 0u);
  auto zoom = run({"render", "--data", kMini, "--gene", "Nkx2-5", "--stage", "18", "--root", "EMAP:2411",
                   "--format", "json"});
  ASSERT_EQ(zoom.code, 0) << zoom.err;
  EXPECT_NE(zoom.out.find(R"("name":"heart")"), std::string::npos);
}

TEST(Cli, RenderErrors) {
  EXPECT_EQ(run({"render", "--data", kMini, "--gene", "Shh", "--stage", "27"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"render", "--data", kMini, "--gene", "Shh", "--stage", "17", "--kind", "pie"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"render", "--data", kMini, "--genes", "Shh,Bmp4", "--stage", "17", "--root", "EMAPA:16405"}).code,
            cli::kExitUsage);
  EXPECT_EQ(run({"render", "--data", "/nonexistent", "--gene", "Shh", "--stage", "17"}).code, cli::kExitUsage);
}

TEST(Cli, CompareMatrixMatchesSubsetQueries) {
  const std::vector<std::string> genes{"gA", "gB", "gC", "gD"};
  auto r = run({"compare", "--data", kMini, "--genes", "gA,gB,gC,gD", "--stage", "17"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(split_ws(line), (std::vector<std::string>{"TS17", "gA", "gB", "gC", "gD"}));
  for (std::size_t i = 0; i < genes.size(); ++i) {
    ASSERT_TRUE(std::getline(lines, line));
    auto cells = split_ws(line);
    ASSERT_EQ(cells.size(), 5u);
    EXPECT_EQ(cells[0], genes[i]);
    for (std::size_t j = 0; j < genes.size(); ++j) {
      bool le = profile_subset(mini().store, mini().anatomy, GeneSymbol(genes[i]), GeneSymbol(genes[j]), Stage(17)).subset;
      bool ge = profile_subset(mini().store, mini().anatomy, GeneSymbol(genes[j]), GeneSymbol(genes[i]), Stage(17)).subset;
      std::string expected = le && ge ? "=" : le ? "⊆" : ge ? "⊇" : "·";
      EXPECT_EQ(cells[j + 1], expected) << genes[i] << " vs " << genes[j];
    }
  }
  EXPECT_NE(r.out.find("⊆"), std::string::npos);
  EXPECT_NE(r.out.find("·"), std::string::npos);
}

TEST(Cli, CloudWithFilterPrefixAndSelection) {
  auto r = run({"cloud", "--data", kMini, "--stage", "18", "--structure", "EMAPA:16198"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(R"("gene":"Crx")"), std::string::npos);
  EXPECT_EQ(r.out.find(R"("gene":"Fgf8")"), std::string::npos);
  auto s = run({"cloud", "--data", kMini, "--stage", "18", "--prefix", "s", "--select", "Sox2"});
  ASSERT_EQ(s.code, 0);
  EXPECT_NE(s.out.find(R"("gene":"Sox2")"), std::string::npos);
  EXPECT_NE(s.out.find(R"("selected":true)"), std::string::npos);
  EXPECT_EQ(s.out.find("Pax6"), std::string::npos);
  EXPECT_EQ(run({"cloud", "--data", kMini, "--stage", "12", "--structure", "EMAPA:17001"}).code, cli::kExitFindings);
}

TEST(Cli, FixturesAreDeterministicAndValid) {
  auto a = temp("fixtures-a");
  auto b = temp("fixtures-b");
  for (const auto& dir : {a, b}) {
    auto r = run({"fixtures", "--out", dir.string(), "--structures", "300", "--genes", "25", "--seed", "5"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* f : {"anatomy.json", "annotations.jsonl"})
    EXPECT_EQ(testing_support::read_file((a / f).string()), testing_support::read_file((b / f).string()));
  auto v = run({"validate", "--data", a.string()});
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_EQ(run({"fixtures", "--out", a.string(), "--structures", "3"}).code, cli::kExitUsage);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Cli, UsageErrors) {
  auto unknown = run({"render", "--bogus"});
  EXPECT_EQ(unknown.code, cli::kExitUsage);
  EXPECT_FALSE(unknown.err.empty());
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"serve", "--data", kMini, "--port", "0"}).code, cli::kExitUsage);
  auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("validate"), std::string::npos);
}

TEST(Cli, DataDirectoryFromEnvironment) {
  ::setenv("ATLASBURST_DATA", kMini.c_str(), 1);
  auto r = run({"validate"});
  ::unsetenv("ATLASBURST_DATA");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0 findings\n");
}
