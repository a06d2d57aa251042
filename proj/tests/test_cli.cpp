#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

#include "ctree/grid.hpp"

namespace {

namespace fs = std::filesystem;
using namespace ctree;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ctree_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  // Runs the binary with stdout/stderr captured to files; returns the exit code.
  int run(const std::string& args) {
    const std::string cmd = std::string(CTREE_CLI) + " " + args + " > " + path("stdout") + " 2> " + path("stderr");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream is(text);
    for (std::string line; std::getline(is, line);) out.push_back(line);
    return out;
  }

  // (branch_id, volume, parent) columns of a branch CSV.
  static std::vector<std::string> saddle_columns(const std::string& csv) {
    std::vector<std::string> out;
    for (const auto& line : lines(csv)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
      if (line.back() == ',') f.emplace_back();
      out.push_back(f.at(0) + "," + f.at(4) + "," + f.at(5));
    }
    return out;
  }

  fs::path dir_;
};

TEST_F(Cli, MonotoneSerialHasOneBranch) {
  ASSERT_EQ(run("run --synthetic monotone --dims 32,32,32 --branches-out " + path("b.csv") + " --metrics-out " +
                path("m.json")),
            0);
  const auto rows = lines(read("b.csv"));
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "branch_id,saddle_value,outer_leaf,leaf_value,volume,parent");
  EXPECT_EQ(rows[1], "-1,,32767,32767,32768,");
  const auto m = nlohmann::json::parse(read("m.json"));
  EXPECT_EQ(m["conservation"]["counted_vertices"], 32768);
  EXPECT_TRUE(m["conservation"]["ok"].get<bool>());
}

TEST_F(Cli, BranchTableGoesToStdoutByDefault) {
  ASSERT_EQ(run("run --synthetic uniform --dims 8,8 --top-branches 3"), 0);
  EXPECT_EQ(lines(read("stdout")).size(), 4u);
}

TEST_F(Cli, SerialAndDistributedAgreeAtLambdaZero) {
  ASSERT_EQ(run("run --synthetic uniform --dims 16,16,8 --seed 3 --branches-out " + path("s.csv")), 0);
  ASSERT_EQ(run("run --synthetic uniform --dims 16,16,8 --seed 3 --mode distributed --blocks 2,2,2 --branches-out " +
                path("d.csv")),
            0);
  EXPECT_EQ(read("s.csv"), read("d.csv"));
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const std::string base = "run --synthetic gaussian --dims 20,20,10 --seed 5 --mode distributed --blocks 4,2,1 --lambda 3 ";
  ASSERT_EQ(run(base + "--branches-out " + path("a.csv") + " --metrics-out " + path("a.json")), 0);
  ASSERT_EQ(run(base + "--concurrent --branches-out " + path("b.csv") + " --metrics-out " + path("b.json")), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  EXPECT_EQ(read("a.json"), read("b.json"));
}

TEST_F(Cli, PairedLambdaRunsKeepTopSaddles) {
  const std::string base = "run --synthetic uniform --dims 64,64,32 --seed 1 --mode distributed --blocks 2,2,1 --top-branches 20 ";
  ASSERT_EQ(run(base + "--lambda 0 --branches-out " + path("l0.csv") + " --metrics-out " + path("l0.json")), 0);
  ASSERT_EQ(run(base + "--lambda 100 --branches-out " + path("l100.csv") + " --metrics-out " + path("l100.json")), 0);
  const auto m0 = nlohmann::json::parse(read("l0.json"));
  const auto m100 = nlohmann::json::parse(read("l100.json"));
  const auto ap = [](const nlohmann::json& m) { return m["communication"]["max_total"]["attachment_points_recv"].get<std::int64_t>(); };
  EXPECT_LE(ap(m100), ap(m0));
  ASSERT_LT(100, m0["smallest_selected_volume"].get<std::int64_t>());
  EXPECT_TRUE(m100["warning"].is_null());
  EXPECT_EQ(saddle_columns(read("l0.csv")), saddle_columns(read("l100.csv")));
}

TEST_F(Cli, LambdaSweepCsv) {
  ASSERT_EQ(run("run --synthetic uniform --dims 16,16,8 --mode distributed --blocks 2,2,1 "
                "--lambda-sweep 0,1,10,100,1000,10000,100000 --sweep-out " + path("sweep.csv") + " --branches-out " +
                path("b.csv")),
            0);
  const auto rows = lines(read("sweep.csv"));
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0], "lambda,max_attachment_points_recv,max_bestupdown_recv,max_branchinfo_recv");
  std::int64_t prev = std::numeric_limits<std::int64_t>::max();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto ap = std::stoll(rows[i].substr(rows[i].find(',') + 1));
    EXPECT_LE(ap, prev);
    prev = ap;
  }
  EXPECT_EQ(prev, 0);
}

TEST_F(Cli, SweepWithoutPathPrintsToStdout) {
  ASSERT_EQ(run("run --synthetic uniform --dims 8,8,4 --mode distributed --blocks 2,1,1 --lambda-sweep 0,10"), 0);
  const auto rows = lines(read("stdout"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].substr(0, 7), "lambda,");
}

TEST_F(Cli, OracleCheckPasses) {
  ASSERT_EQ(run("run --synthetic integer --dims 8,8,6 --mode distributed --blocks 2,2,1 --lambda 2 --oracle-check "
                "--metrics-out " + path("m.json")),
            0);
  const auto m = nlohmann::json::parse(read("m.json"));
  for (const auto& [name, entry] : m["oracle_check"].items()) {
    EXPECT_GT(entry["checked"].get<std::int64_t>(), 0) << name;
    EXPECT_EQ(entry["mismatches"], 0) << name;
  }
  EXPECT_TRUE(m["oracle_check"].contains("distributed_volumes"));
}

TEST_F(Cli, TimingsOnlyWhenAsked) {
  ASSERT_EQ(run("run --synthetic uniform --dims 8,8 --mode distributed --blocks 2,1 --metrics-out " + path("a.json")), 0);
  ASSERT_EQ(run("run --synthetic uniform --dims 8,8 --mode distributed --blocks 2,1 --timings --metrics-out " + path("b.json")), 0);
  const auto a = nlohmann::json::parse(read("a.json"));
  const auto b = nlohmann::json::parse(read("b.json"));
  EXPECT_FALSE(a["communication"]["phases"]["fan_in"].contains("seconds_max"));
  EXPECT_TRUE(b["communication"]["phases"]["fan_in"].contains("seconds_max"));
}

TEST_F(Cli, LargeLambdaWarns) {
  ASSERT_EQ(run("run --synthetic uniform --dims 8,8 --mode distributed --blocks 2,1 --lambda 1000 --top-branches 5"), 0);
  EXPECT_NE(read("stderr").find("warning"), std::string::npos);
  EXPECT_EQ(lines(read("stdout")).size(), 2u);
}

TEST_F(Cli, RawInputRoundTrip) {
  const auto g = uniform_random_grid({10, 9, 4}, 8);
  write_raw(path("grid.raw"), g, 64, ByteOrder::big);
  ASSERT_EQ(run("run --input " + path("grid.raw") + " --dims 10,9,4 --dtype f64 --endian big --branches-out " +
                path("a.csv")),
            0);
  write_raw(path("grid32.raw"), ScalarGrid({10, 9, 4}, [&] {
              std::vector<double> v(g.values().begin(), g.values().end());
              for (auto& x : v) x = static_cast<float>(x);
              return v;
            }()),
            32, ByteOrder::little);
  ASSERT_EQ(run("run --input " + path("grid32.raw") + " --dims 10,9,4 --branches-out " + path("b.csv")), 0);
  EXPECT_EQ(lines(read("a.csv"))[0], lines(read("b.csv"))[0]);
  EXPECT_EQ(saddle_columns(read("a.csv")), saddle_columns(read("b.csv")));
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("run --dims 4,4"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,4 --lambda -1 --mode distributed"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,4 --mode distributed --blocks 8,1"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,4 --blocks 2,1"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,4 --top-branches 0"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,4 --top-branches 3 --threshold 2"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 0,4"), 1);
  EXPECT_EQ(run("run --synthetic uniform --dims 4,x"), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_NE(read("stderr").size(), 0u);
}

TEST_F(Cli, DataErrorsExitTwo) {
  std::ofstream(path("short.raw"), std::ios::binary) << "abcd";
  EXPECT_EQ(run("run --input " + path("short.raw") + " --dims 4,4"), 2);
  EXPECT_NE(read("stderr").find("expected 64 bytes, found 4"), std::string::npos);

  std::vector<double> v(16, 1.0);
  v[5] = std::nan("");
  {
    // Written by hand: the grid type itself rejects NaN.
    std::ofstream out(path("nan.raw"), std::ios::binary);
    for (double x : v) out.write(reinterpret_cast<const char*>(&x), sizeof x);
  }
  EXPECT_EQ(run("run --input " + path("nan.raw") + " --dims 4,4 --dtype f64"), 2);
  EXPECT_NE(read("stderr").find("input:"), std::string::npos);
  EXPECT_EQ(run("run --input " + path("missing.raw") + " --dims 4,4"), 2);
}

TEST_F(Cli, AdvisorReproducesMemoryExample) {
  ASSERT_EQ(run("advise --dims 2048,2048,2048 --ranks 16 --mem-per-rank 512GB --base-mem 133.26GiB "
                "--run-a 574.66GiB,697320285 --run-b 439.17GiB,1288810 --json"),
            0);
  const auto j = nlohmann::json::parse(read("stdout"));
  EXPECT_EQ(j["lambda_min_memory"], 4);
  EXPECT_NEAR(j["bytes_per_attachment_point"].get<double>(), 209.02, 0.5);
  EXPECT_EQ(j["communication_floor"], 2048);
  EXPECT_EQ(j["recommended_lambda_min"], 2048);
}

TEST_F(Cli, AdvisorHugeBudgetAndInfeasible) {
  ASSERT_EQ(run("advise --vertices 1000000 --ranks 8 --mem-per-rank 1TB --bytes-per-ap 200 --json"), 0);
  EXPECT_EQ(nlohmann::json::parse(read("stdout"))["lambda_min_memory"], 0);
  EXPECT_EQ(run("advise --vertices 1000000 --ranks 8 --mem-per-rank 1GB --base-mem 2GB --bytes-per-ap 200"), 1);
  EXPECT_NE(read("stderr").find("unlikely to be viable"), std::string::npos);
  EXPECT_EQ(run("advise --vertices 1000 --ranks 8 --mem-per-rank 1GB --run-a 1GB,5 --run-b 2GB,5"), 1);
}

}  // namespace
