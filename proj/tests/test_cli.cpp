#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>

#include <qontext/cli.hpp>

#include "test_support.hpp"

using namespace qontext;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

const std::string kTable = test_support::table1_dir().string();

std::filesystem::path temp_path(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("qontext-cli-" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, AnalyzePooledPrintsMeanRow) {
  const auto r = run({"analyze", kTable, "--pooled"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Mean Value             0.5727     0.4273     0.8753     0.1247     0.6029     0.5000     0.6556"),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("cos theta -0.0477"), std::string::npos);
  EXPECT_EQ(r.out.find("exp1"), std::string::npos);
}

TEST(Cli, AnalyzeJsonUsesReportSchema) {
  const auto r = run({"analyze", kTable, "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = Json::parse(r.out);
  EXPECT_EQ(j.at("schema"), "qontext/report/v1");
  EXPECT_EQ(j.at("pooling"), "paper");
}

TEST(Cli, AnalyzeWithReferenceListsDiscrepancies) {
  const auto r = run({"analyze", kTable, "--reference", (test_support::fixture_dir() / "reference_values.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("cos theta(+): reference -0.2285 is not reproduced"), std::string::npos) << r.out;
}

TEST(Cli, StrictPoolingChangesResult) {
  const auto paper = run({"analyze", kTable, "--pooled"});
  const auto strict = run({"analyze", kTable, "--pooled", "--pooling", "strict"});
  ASSERT_EQ(strict.code, 0) << strict.err;
  EXPECT_NE(paper.out, strict.out);
  EXPECT_NE(strict.out.find("0.7500"), std::string::npos) << strict.out;
}

TEST(Cli, WavefunctionReportsBornAndMeanValue) {
  const auto r = run({"wavefunction", kTable});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Born check: PASS"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("mean value (A phi, phi) = 0.145"), std::string::npos) << r.out;
  const auto j = Json::parse(run({"wavefunction", kTable, "--format", "json"}).out);
  EXPECT_NEAR(j.at("wavefunction").at("mean_value").get<double>(), 0.1454, 1e-4);
}

TEST(Cli, WavefunctionWithPublishedPhasesFailsBorn) {
  const auto r = run({"wavefunction", kTable, "--phases", "paper:1.8013,1.527"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Born check: FAIL"), std::string::npos) << r.out;
  EXPECT_EQ(run({"wavefunction", kTable, "--phases", "paper:abc"}).code, 1);
}

TEST(Cli, TtestAndTable) {
  const auto t = run({"ttest", kTable});
  ASSERT_EQ(t.code, 0) << t.err;
  EXPECT_NE(t.out.find("t = -1.1102  pooled sd = 0.0915  df = 4  two-tailed p = 0.3292"), std::string::npos) << t.out;
  const auto csv = run({"table1", kTable, "--format", "csv"});
  ASSERT_EQ(csv.code, 0);
  EXPECT_NE(csv.out.find("exp2,0.5714,0.4286,1.0000,0.0000,0.7000,0.0000,0.7000"), std::string::npos) << csv.out;
  EXPECT_NE(csv.out.find("Standard Deviation,0.1189,0.1189,0.1563,0.1563,0.1513,0.5000,0.0509"), std::string::npos);
  EXPECT_EQ(run({"ttest", (test_support::table1_dir() / "exp1.jsonl").string()}).code, 2);
}

TEST(Cli, ValidateGoodAndCorruptedFiles) {
  const auto ok = run({"validate", kTable});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("ok: 98 records in 3 experiment(s)"), std::string::npos);

  const auto bad = temp_path("bad.jsonl");
  {
    std::ifstream in(test_support::table1_dir() / "exp3.jsonl");
    std::ofstream out(bad);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) out << (++n == 4 ? line.substr(0, line.size() / 2) : line) << '\n';
  }
  const auto r = run({"validate", bad.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
  EXPECT_EQ(run({"validate", "/nonexistent/qontext"}).code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"analyze"}).code, 1);
  EXPECT_EQ(run({"analyze", kTable, "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"analyze", kTable, "--pooling", "other"}).code, 1);
  EXPECT_EQ(run({"analyze", kTable, "--pooled", "--per-experiment"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, SimulateRegeneratesFixtures) {
  const auto out = temp_path("all.jsonl");
  const auto r = run({"simulate", "--spec", (test_support::fixture_dir() / "table1_spec.json").string(), "--out",
                      out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("wrote 98 records"), std::string::npos);
  const auto a = test_support::load_fixture(out);
  const auto b = test_support::table1_dataset();
  EXPECT_EQ(serialize_dataset(a), serialize_dataset(b));
}

TEST(Cli, BinaryRunsAsSubprocess) {
  const std::string cmd = std::string(QONTEXT_CLI_PATH) + " table1 " + kTable + " 2>&1";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  ASSERT_TRUE(pipe);
  std::string output;
  char buf[512];
  while (std::fgets(buf, sizeof buf, pipe)) output += buf;
  const int status = ::pclose(pipe);
  EXPECT_EQ(WEXITSTATUS(status), 0) << output;
  EXPECT_NE(output.find("Mean Value"), std::string::npos) << output;
}
