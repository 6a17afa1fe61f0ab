#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"

namespace blockadmm::cli {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("blockadmm_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  std::string gen_small_l2(const std::string& name, const std::string& blocks = "6") {
    const auto r = invoke({"gen", "l2", "--rows", "40", "--blocks", blocks, "--block-size", "5",
                           "--nnz-per-row", "4", "--groups", "3", "--out", path(name)});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return path(name);
  }

  std::string gen_small_l1(const std::string& name) {
    const auto r = invoke({"gen", "l1", "--rows", "30", "--blocks", "6", "--block-size", "4",
                           "--sparsity", "4", "--out", path(name)});
    EXPECT_EQ(r.code, kExitOk) << r.err;
    return path(name);
  }

  fs::path root_;
};

TEST_F(CliTest, GenWritesProblemDirectories) {
  const std::string l2 = gen_small_l2("l2");
  EXPECT_TRUE(fs::exists(fs::path(l2) / "meta.json"));
  EXPECT_TRUE(fs::exists(fs::path(l2) / "A.mtx"));
  EXPECT_TRUE(fs::exists(fs::path(l2) / "b.vec"));
  const std::string l1 = gen_small_l1("l1");
  int files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(l1)) ++files;
  EXPECT_EQ(files, 4);
  EXPECT_TRUE(fs::exists(fs::path(l1) / "x_star.vec"));
}

TEST_F(CliTest, GenDefaultsToOutputRootFromEnvironment) {
  ::setenv("BLOCKADMM_OUT", root_.c_str(), 1);
  const auto r = invoke({"--seed", "9", "gen", "l2", "--rows", "20", "--blocks", "2",
                         "--block-size", "5", "--nnz-per-row", "3"});
  ::unsetenv("BLOCKADMM_OUT");
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "l2-seed9" / "meta.json"));
  EXPECT_NE(r.out.find("l2-seed9"), std::string::npos);
}

TEST_F(CliTest, SolveExitCodesFollowTheOutcome) {
  const std::string dir = gen_small_l2("p");
  auto ok = invoke({"solve", dir, "--alg", "hadmm", "--tau-rule", "theory"});
  ASSERT_EQ(ok.code, kExitOk) << ok.err;
  const auto report = nlohmann::json::parse(ok.out);
  EXPECT_EQ(report.at("outcome"), "converged");
  EXPECT_EQ(report.at("tau_rule"), "hadmm-theory");
  EXPECT_LE(report.at("final_half_sq_residual").get<double>(), 1e-10);

  EXPECT_EQ(invoke({"solve", dir, "--alg", "fadmm", "--tau-rule", "theory", "--max-epochs", "2"}).code,
            kExitMaxEpochs);
  EXPECT_EQ(invoke({"solve", dir, "--alg", "jadmm", "--tau-multiplier", "0.001", "--max-epochs",
                    "20000"})
                .code,
            kExitDiverged);
}

TEST_F(CliTest, SolveWritesTraceAndReport) {
  const std::string dir = gen_small_l2("p");
  const auto r = invoke({"solve", dir, "--alg", "fadmm", "--tau-rule", "theory", "--g-metric",
                         "--trace", path("trace.csv"), "--report", path("report.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream trace(path("trace.csv"));
  std::string header, first;
  std::getline(trace, header);
  std::getline(trace, first);
  EXPECT_EQ(header, "epoch,half_sq_residual,g_dist_to_ref,g_step");
  EXPECT_EQ(first.substr(0, 2), "0,");
  EXPECT_TRUE(fs::exists(path("report.json")));
}

TEST_F(CliTest, MerelyConvexProblemRejectsMuRules) {
  const std::string dir = gen_small_l1("p");
  EXPECT_EQ(invoke({"solve", dir, "--alg", "fadmm", "--tau-rule", "theory"}).code, kExitInvalidConfig);
  EXPECT_EQ(invoke({"solve", dir, "--alg", "hadmm2", "--tau-rule", "theory"}).code, kExitOk);
}

TEST_F(CliTest, UsageAndIoErrors) {
  const std::string dir = gen_small_l2("p");
  EXPECT_EQ(invoke({"solve", dir, "--alg", "fadmm"}).code, kExitUsage);
  EXPECT_EQ(invoke({"solve", dir, "--alg", "fadmm", "--tau-rule", "theory", "--tau-value", "3"}).code,
            kExitUsage);
  EXPECT_EQ(invoke({"solve", dir, "--alg", "nope", "--tau-rule", "theory"}).code, kExitUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(invoke({}).code, kExitUsage);
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(invoke({"solve", path("missing"), "--alg", "fadmm", "--tau-rule", "theory"}).code, kExitIo);
  EXPECT_EQ(invoke({"sweep", path("missing.json")}).code, kExitIo);
}

TEST_F(CliTest, TauReportListsEveryRule) {
  const std::string dir = gen_small_l2("p");
  const auto r = invoke({"tau-report", dir});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "block_index,rule,tau");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3 * 6);
  EXPECT_NE(r.out.find("1,jadmm-theory,"), std::string::npos);
  EXPECT_NE(r.out.find("6,fadmm-theory,"), std::string::npos);

  const std::string l1 = gen_small_l1("q");
  const auto convex = invoke({"tau-report", l1});
  EXPECT_NE(convex.out.find("hadmm2-theory"), std::string::npos);
  EXPECT_EQ(convex.out.find("fadmm-theory"), std::string::npos);
  const auto with_mu = invoke({"tau-report", l1, "--mu", "1", "--csv", path("tau.csv")});
  EXPECT_NE(with_mu.out.find("fadmm-theory"), std::string::npos);
  EXPECT_TRUE(fs::exists(path("tau.csv")));
}

TEST_F(CliTest, TauReportMarksDegenerateJacobiRule) {
  const std::string dir = gen_small_l2("single", "1");
  const auto r = invoke({"tau-report", dir});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("1,jadmm-theory,degenerate"), std::string::npos);
  EXPECT_EQ(r.out.find("hadmm2"), std::string::npos);
}

TEST_F(CliTest, SweepRunsAConfigAndWritesCsv) {
  std::ofstream(path("s.json")) << R"({
    "name": "tiny", "family": "l2", "algorithms": ["jadmm", "fadmm"], "runs": 2,
    "instance": {"rows": 40, "num_blocks": 6, "block_size": 5, "nnz_per_row": 4, "hybrid_groups": 3}
  })";
  const auto r = invoke({"sweep", path("s.json"), "--csv", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("tiny"), std::string::npos);
  EXPECT_NE(r.out.find("F-ADMM"), std::string::npos);
  std::ifstream csv(path("s.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.substr(0, 17), "family,algorithm,");

  std::ofstream(path("empty.json")) << R"({"family": "l2", "algorithms": []})";
  EXPECT_EQ(invoke({"sweep", path("empty.json")}).code, kExitUsage);
  std::ofstream(path("bad.json")) << R"({"family": "l2", "algorithms": ["fadmm"], "oops": 1})";
  EXPECT_EQ(invoke({"sweep", path("bad.json")}).code, kExitInvalidConfig);
}

}  // namespace
}  // namespace blockadmm::cli
