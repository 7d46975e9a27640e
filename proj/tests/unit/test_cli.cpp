#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rayfield/cli.hpp"

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
};

Outcome run(std::initializer_list<std::string> args) {
  std::vector<std::string> storage{"rayfield"};
  storage.insert(storage.end(), args);
  std::vector<char*> argv;
  for (std::string& s : storage) argv.push_back(s.data());
  testing::internal::CaptureStdout();
  testing::internal::CaptureStderr();
  const int code = rayfield::cli::run(static_cast<int>(argv.size()), argv.data());
  std::string out = testing::internal::GetCapturedStdout();
  testing::internal::GetCapturedStderr();
  return {code, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("rayfield_cli_" + std::string(testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

nlohmann::json without_wall_time(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  j.erase("wall_ms");
  return j;
}

}  // namespace

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"audit", "--suite", "conv-r2p", "--bogus"}).code, 2);
  EXPECT_EQ(run({"audit", "--suite", "no-such-suite"}).code, 2);
  EXPECT_EQ(run({"gen", "--cams", "9", "--out", path("x.json")}).code, 2);
  EXPECT_EQ(run({"kernel-check", "--kernel", "kappa9"}).code, 2);
}

TEST_F(CliTest, MalformedInputIsParseError) {
  std::ofstream(path("bad.json")) << R"({"feature_type":"scalar3","cameras":[],"rays":[{"d":[0,0,1]}]})";
  EXPECT_EQ(run({"audit", "--suite", "conv-r2p", "--input", path("bad.json"), "--trials", "1"}).code, 2);
}

TEST_F(CliTest, GenThenConvToPointAudit) {
  ASSERT_EQ(run({"gen", "--cams", "8", "--res", "16", "--seed", "7", "--out", path("s.json")}).code, 0);
  const Outcome audit = run({"audit", "--suite", "conv-r2p", "--input", path("s.json"), "--trials", "100", "--seed", "7"});
  EXPECT_EQ(audit.code, 0);
  const nlohmann::json report = nlohmann::json::parse(audit.out);
  EXPECT_EQ(report["suite"], "conv-r2p");
  EXPECT_EQ(report["trials"], 100);
  EXPECT_EQ(report["seed"], 7);
  EXPECT_TRUE(report["pass"].get<bool>());
  EXPECT_LT(report["max_residual"].get<double>(), 1e-8);
  for (const char* key : {"tolerance", "mean_residual", "wall_ms"}) EXPECT_TRUE(report.contains(key)) << key;
}

TEST_F(CliTest, KernelCheckRayToPoint) {
  const Outcome r = run({"kernel-check", "--kernel", "ray2point", "--samples", "10000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_LT(nlohmann::json::parse(r.out)["max_residual"].get<double>(), 1e-10);
}

TEST_F(CliTest, PixelVarianceAudit) {
  const Outcome r = run({"audit", "--suite", "render-pixvar", "--rotations", "6"});
  EXPECT_EQ(r.code, 0);
  EXPECT_LT(nlohmann::json::parse(r.out)["max_residual"].get<double>(), 1e-5);
}

TEST_F(CliTest, SameSeedSameBytes) {
  ASSERT_EQ(run({"gen", "--res", "6", "--scene", "random", "--seed", "3", "--out", path("a.json")}).code, 0);
  ASSERT_EQ(run({"gen", "--res", "6", "--scene", "random", "--seed", "3", "--out", path("b.json")}).code, 0);
  EXPECT_EQ(slurp(path("a.json")), slurp(path("b.json")));
  ASSERT_EQ(run({"gen", "--res", "6", "--scene", "random", "--seed", "4", "--out", path("c.json")}).code, 0);
  EXPECT_NE(slurp(path("a.json")), slurp(path("c.json")));

  const Outcome first = run({"audit", "--suite", "attn-r2p", "--trials", "8", "--seed", "5", "--report", path("r1.json")});
  const Outcome second = run({"audit", "--suite", "attn-r2p", "--trials", "8", "--seed", "5", "--report", path("r2.json")});
  EXPECT_EQ(without_wall_time(first.out), without_wall_time(second.out));
  EXPECT_EQ(without_wall_time(slurp(path("r1.json"))), without_wall_time(slurp(path("r2.json"))));

  ASSERT_EQ(run({"render", "--res", "4", "--out", path("a.ppm")}).code, 0);
  ASSERT_EQ(run({"render", "--res", "4", "--out", path("b.ppm")}).code, 0);
  const std::string image = slurp(path("a.ppm"));
  EXPECT_EQ(image, slurp(path("b.ppm")));
  EXPECT_EQ(image.rfind("P6\n4 4\n255\n", 0), 0u);
  EXPECT_EQ(image.size(), std::string("P6\n4 4\n255\n").size() + 4 * 4 * 3);
}

TEST_F(CliTest, SdfWritesCsv) {
  ASSERT_EQ(run({"sdf", "--grid", "3", "--out", path("s.csv")}).code, 0);
  std::istringstream csv(slurp(path("s.csv")));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "x,y,z,value");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  EXPECT_EQ(rows, 27);
}

TEST_F(CliTest, FitDemoPasses) {
  const Outcome r = run({"fit", "--seed", "7"});
  EXPECT_EQ(r.code, 0);
  const nlohmann::json j = nlohmann::json::parse(r.out);
  EXPECT_LT(j["model_rmse"].get<double>(), j["baseline_rmse"].get<double>());
}
