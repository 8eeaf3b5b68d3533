#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "medpoc/estimator.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/scm.hpp"

using namespace medpoc;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("medpoc_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  CliResult run(const std::string& args) const {
    const std::string out = path("stdout.txt"), err = path("stderr.txt");
    const std::string cmd = std::string(MEDPOC_CLI_PATH) + " " + args + " >" + out + " 2>" + err;
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
  }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string simulate(std::size_t n, int seed, const std::string& name = "data.csv") const {
    const std::string p = path(name);
    const auto r = run("simulate --preset paper-bernoulli --n " + std::to_string(n) + " --seed " +
                       std::to_string(seed) + " --out " + p);
    EXPECT_EQ(r.code, 0) << r.err;
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, SimulateIsDeterministic) {
  const auto a = slurp(simulate(1000, 7, "a.csv"));
  const auto b = slurp(simulate(1000, 7, "b.csv"));
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1001);
  EXPECT_EQ(a.substr(0, a.find('\n')), "x,m,y");
  EXPECT_NE(a, slurp(simulate(1000, 8, "c.csv")));
}

TEST_F(Cli, SimulateRejectsZeroRows) {
  const auto r = run("simulate --n 0");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("usage"), std::string::npos);
}

TEST_F(Cli, EstimateReportMatchesLibraryAndIsByteIdentical) {
  const auto data = simulate(2000, 3);
  const std::string args = "estimate --input " + data + " --x-base 0 --x-alt 1 --y 1 --m 1 --bootstrap 100 --seed 5";
  const auto r1 = run(args);
  const auto r2 = run(args);
  ASSERT_EQ(r1.code, 0) << r1.err;
  EXPECT_EQ(r1.out, r2.out);

  const auto j = json::parse(r1.out);
  EXPECT_EQ(j["tool"], "medpoc");
  EXPECT_EQ(j["seed"], 5);
  EXPECT_TRUE(j["error"].is_null());
  const auto& block = j["queries"][0];
  EXPECT_EQ(block["case"], "unconditional");
  Target t;
  t.query.x_base = OrderedValue(0.0);
  t.query.x_alt = OrderedValue(1.0);
  t.query.y_threshold = OrderedValue(1.0);
  t.query.m_fixed = OrderedValue(1.0);
  const Estimate e = estimate(load_dataset_file(data, Schema{}), t);
  std::map<std::string, json> byname;
  for (const auto& v : block["values"]) byname[v["name"]] = v;
  for (const auto& nv : e.values) {
    ASSERT_TRUE(byname.count(nv.name)) << nv.name;
    EXPECT_EQ(byname[nv.name]["estimate"].get<double>(), *nv.value) << nv.name;
    EXPECT_LE(byname[nv.name]["ci_lower"].get<double>(), byname[nv.name]["ci_upper"].get<double>());
  }
  EXPECT_EQ(block["bootstrap"]["replicates"], 100);
}

TEST_F(Cli, EstimateWithEvidenceReportsCaseFlag) {
  const auto data = simulate(3000, 4);
  const auto r = run("estimate --input " + data +
                     " --y 1 --evidence-x 1 --y-interval 1,1 --y-upper-closed --bootstrap 0");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  const auto& b = j["queries"][0];
  EXPECT_EQ(b["case"], "A");
  EXPECT_EQ(b["query"]["evidence"]["kind"], "E'");
  EXPECT_EQ(b["query"]["evidence"]["y_interval"]["upper_closed"], true);
  EXPECT_FALSE(b["terms"].is_null());

  const auto m = run("estimate --input " + data +
                     " --y 1 --evidence-x 0 --m-interval 0,1 --m-upper-closed --bootstrap 0");
  ASSERT_EQ(m.code, 0) << m.err;
  const auto jm = json::parse(m.out);
  EXPECT_EQ(jm["queries"][0]["warnings"].size(), 1u);
}

TEST_F(Cli, AbsentTreatmentLevelIsAPositivityError) {
  const auto data = simulate(200, 1);
  const auto r = run("estimate --input " + data + " --x-alt 5");
  EXPECT_EQ(r.code, 2);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["error"]["kind"], "positivity");
  EXPECT_NE(r.err.find("positivity"), std::string::npos);
}

TEST_F(Cli, DataAndUsageErrorsExitTwo) {
  EXPECT_EQ(run("estimate --input " + path("missing.csv")).code, 2);
  EXPECT_EQ(run("estimate").code, 2);
  EXPECT_EQ(run("estimate --no-such-flag").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  const auto data = simulate(100, 2);
  EXPECT_EQ(run("estimate --input " + data + " --y-interval 1,2").code, 2);
  EXPECT_EQ(run("estimate --input " + data + " --family pn --evidence-x 1").code, 2);
  std::ofstream(path("bad.csv")) << "x,m,y\n1,0,1\n0,oops,1\n";
  const auto r = run("estimate --input " + path("bad.csv"));
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(json::parse(r.out)["error"]["kind"], "parse");
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
}

TEST_F(Cli, TableFormatUsesPercentages) {
  const auto data = simulate(2000, 6);
  const auto r = run("estimate --input " + data + " --format table --bootstrap 50 --family pn");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("PN"), std::string::npos);
  EXPECT_NE(r.out.find("%"), std::string::npos);
  EXPECT_NE(r.out.find("95% CI"), std::string::npos);
}

TEST_F(Cli, ConfigDocumentWithFlagOverrides) {
  const auto data = simulate(1500, 8);
  json cfg = {{"input", data},
              {"seed", 11},
              {"bootstrap", {{"replicates", 0}}},
              {"queries",
               {{{"x_base", 0}, {"x_alt", 1}, {"y", 1}},
                {{"x_base", 0}, {"x_alt", 1}, {"y", 1}, {"family", "ps"}},
                {{"x_base", 0},
                 {"x_alt", 1},
                 {"y", 1},
                 {"evidence", {{"x", 1}, {"y_interval", {{"lower", 1}, {"upper", nullptr}}}}}}}}};
  std::ofstream(path("cfg.json")) << cfg.dump();
  const auto r = run("--version");
  EXPECT_EQ(r.code, 0);
  const auto a = run("estimate --config " + path("cfg.json"));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto ja = json::parse(a.out);
  EXPECT_EQ(ja["queries"].size(), 3u);
  EXPECT_EQ(ja["seed"], 11);
  // The third query's evidence equals the PN family's evidence.
  EXPECT_EQ(ja["queries"][2]["values"][0]["estimate"], json::parse(run("estimate --input " + data + " --family pn --bootstrap 0").out)["queries"][0]["values"][0]["estimate"]);
  const auto b = run("estimate --config " + path("cfg.json") + " --seed 12");
  EXPECT_EQ(json::parse(b.out)["seed"], 12);
}

TEST_F(Cli, SweepOverThresholdsKeepsTheDecomposition) {
  const auto r = run("sweep --param y --values 0,0.5,1,2 --format json --svg " + path("chart.svg"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["source"], "analytic");
  std::map<double, std::map<std::string, double>> grid;
  for (const auto& row : j["rows"]) {
    if (!row["value"].is_null()) grid[row["point"]][row["quantity"]] = row["value"];
  }
  ASSERT_EQ(grid.size(), 4u);
  for (auto& [pt, v] : grid) EXPECT_EQ(v["T-PNS"], v["ND-PNS"] + v["NI-PNS"]) << pt;
  const auto svg = slurp(path("chart.svg"));
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"8,5\""), std::string::npos);
  EXPECT_NE(svg.find("stroke-dasharray=\"2,4\""), std::string::npos);
}

TEST_F(Cli, SweepSinglePointEqualsEstimate) {
  const auto data = simulate(2000, 9);
  const auto s = run("sweep --input " + data + " --param y --values 1 --format json");
  const auto e = run("estimate --input " + data + " --y 1 --bootstrap 0");
  ASSERT_EQ(s.code, 0) << s.err;
  const auto js = json::parse(s.out);
  const auto je = json::parse(e.out);
  for (const auto& v : je["queries"][0]["values"]) {
    bool found = false;
    for (const auto& row : js["rows"]) {
      if (row["quantity"] == v["name"]) {
        EXPECT_EQ(row["value"], v["estimate"]);
        found = true;
      }
    }
    EXPECT_TRUE(found) << v["name"];
  }
}

TEST_F(Cli, SweepFlagsFailingPointsAndContinues) {
  const auto r = run("sweep --param /mediator/intercept --values 0,1,2");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("param,point,quantity,value,case,status"), std::string::npos);
  // Three grid points, five quantities each.
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 1 + 3 * 5);

  const auto data = simulate(500, 10);
  const auto f = run("sweep --input " + data + " --param y --values 1 --x-alt 4 --format json");
  EXPECT_EQ(f.code, 0);
  const auto j = json::parse(f.out);
  EXPECT_EQ(j["flagged_points"], 1);
  EXPECT_NE(f.err.find("warning"), std::string::npos);
}

TEST_F(Cli, QuickVerifyPassesAndRepeatsExactly) {
  const auto a = run("verify --quick --format json");
  ASSERT_EQ(a.code, 0) << a.err << a.out;
  const auto j = json::parse(a.out);
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_EQ(j["criteria"].size(), 8u);
  EXPECT_EQ(j["protocol"].size(), 18u);
  const auto b = run("verify --quick --format json");
  EXPECT_EQ(a.out, b.out);
}
