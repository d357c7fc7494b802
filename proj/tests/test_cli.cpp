#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cantor_simplex/cli.hpp"

using namespace cantor_simplex;
namespace fs = std::filesystem;

namespace {

const std::string kSamples = SAMPLES_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cantor_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, AmalgamateSamples) {
  auto r = run({"amalgamate", "--a", kSamples + "/A.json", "--b", kSamples + "/B.json", "--c", kSamples + "/C.json",
                "--alpha", kSamples + "/alpha.json", "--beta", kSamples + "/beta.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["status"], "VERIFIED");
  EXPECT_NE(r.out.find("\"1/8\""), std::string::npos);
}

TEST_F(Cli, BuildThenCheck) {
  auto b = run({"limit-build", "--k", "2", "--stages", "8", "--denoms", "4", "--out", path("chain.json")});
  ASSERT_EQ(b.code, 0) << b.err;
  auto c = run({"check", "--chain", path("chain.json"), "--out", path("check.json")});
  EXPECT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("check.json")))["status"], "VERIFIED");
}

TEST_F(Cli, DivideAndReplayIdentical) {
  auto d = run({"divide", "--set", kSamples + "/set.json", "--n", "2", "--eps", "1/4", "--out", path("div.json")});
  ASSERT_EQ(d.code, 0) << d.err;
  auto r = run({"replay", path("div.json")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("identical"), std::string::npos);
}

TEST_F(Cli, TamperedCertificateFailsReplay) {
  ASSERT_EQ(run({"divide", "--set", kSamples + "/full.json", "--n", "3", "--eps", "1/2", "--out", path("div.json")}).code, 0);
  auto text = slurp(path("div.json"));
  auto pos = text.find("\"VERIFIED\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 10, "\"FAILED\"");
  std::ofstream(path("div.json"), std::ios::binary) << text;
  EXPECT_EQ(run({"replay", path("div.json")}).code, 1);
}

TEST_F(Cli, ChangedInputFailsReplay) {
  fs::copy_file(kSamples + "/set.json", path("set.json"));
  ASSERT_EQ(run({"divide", "--set", path("set.json"), "--n", "2", "--eps", "1/4", "--out", path("div.json")}).code, 0);
  std::ofstream(path("set.json"), std::ios::binary) << "[\"0\"]\n";
  EXPECT_EQ(run({"replay", path("div.json")}).code, 1);
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run({"divide", "--set", kSamples + "/full.json", "--n", "2", "--eps", "0"}).code, 2);
  EXPECT_EQ(run({"divide", "--set", kSamples + "/full.json", "--n", "2", "--eps", "1/4", "--measures", "1/3"}).code, 2);
  std::ofstream(path("bad.json")) << "{\"words\": [";
  EXPECT_EQ(run({"divide", "--set", path("bad.json"), "--n", "2", "--eps", "1/4"}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  EXPECT_EQ(run({"check", "--chain", kSamples + "/missing.json"}).code, 2);
}

TEST_F(Cli, WordBudgetGivesIncomplete) {
  auto r = run({"divide", "--set", kSamples + "/set.json", "--n", "3", "--eps", "1/10", "--mode", "weight", "--measures",
                "1/3", "--word-budget", "3"});
  EXPECT_EQ(r.code, 3) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["status"], "INCOMPLETE");
}

TEST_F(Cli, SpeedupDemo) {
  ASSERT_EQ(run({"limit-build", "--k", "3", "--stages", "6", "--denoms", "3", "--out", path("c3.json")}).code, 0);
  auto r = run({"speedup-demo", "--chain", path("c3.json"), "--perm", "1,2,0", "--atoms", "8"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(run({"speedup-demo", "--chain", path("c3.json"), "--perm", "0,0,1"}).code, 2);
}
