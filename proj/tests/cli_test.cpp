#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

std::string g_binary;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

int run(const std::string& args, bool raw = false) {
  const std::string cmd =
      raw ? args : g_binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_config(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

const char* kTinyConfig = R"({
  "mode": "single-apple-two-actuator",
  "steps": 4,
  "seed": 5,
  "baseline_runs": 2
})";

const char* kTinyMultiConfig = R"({
  "mode": "multi-apple",
  "epochs": 2,
  "train_coords": 3,
  "test_coords": 4,
  "seed": 5,
  "baseline_runs": 1
})";

}  // namespace

TEST(Cli, MissingConfigIsUsageError) {
  TempDir dir("pida2c_cli_missing");
  EXPECT_EQ(run("train --config " + dir.str() + "/nope.json --out " +
                dir.str() + "/run"),
            2);
}

TEST(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, MalformedConfigIsUsageError) {
  TempDir dir("pida2c_cli_badcfg");
  write_config(dir.path / "bad.json", "{ not json");
  EXPECT_EQ(run("train --config " + dir.str() + "/bad.json --out " +
                dir.str() + "/run"),
            2);
  write_config(dir.path / "badmode.json", R"({"mode": "bogus"})");
  EXPECT_EQ(run("train --config " + dir.str() + "/badmode.json --out " +
                dir.str() + "/run"),
            2);
}

TEST(Cli, TrainIsDeterministicPerSeed) {
  TempDir dir("pida2c_cli_det");
  write_config(dir.path / "cfg.json", kTinyConfig);
  const std::string cfg = (dir.path / "cfg.json").string();
  ASSERT_EQ(run("train --config " + cfg + " --seed 7 --out " + dir.str() + "/a"), 0);
  ASSERT_EQ(run("train --config " + cfg + " --seed 7 --out " + dir.str() + "/b"), 0);
  const auto a = read_file(dir.path / "a" / "steps.csv");
  const auto b = read_file(dir.path / "b" / "steps.csv");
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  // a different seed diverges
  ASSERT_EQ(run("train --config " + cfg + " --seed 8 --out " + dir.str() + "/c"), 0);
  EXPECT_NE(a, read_file(dir.path / "c" / "steps.csv"));
}

TEST(Cli, BaselineReportsStats) {
  TempDir dir("pida2c_cli_base");
  write_config(dir.path / "cfg.json", kTinyConfig);
  EXPECT_EQ(run("baseline --config " + (dir.path / "cfg.json").string() +
                " --out " + dir.str() + "/base"),
            0);
  EXPECT_TRUE(fs::exists(dir.path / "base" / "baseline.csv"));
}

TEST(Cli, TestWithoutCheckpointFails) {
  TempDir dir("pida2c_cli_nockpt");
  write_config(dir.path / "cfg.json", kTinyMultiConfig);
  fs::create_directories(dir.path / "empty");
  EXPECT_EQ(run("test --config " + (dir.path / "cfg.json").string() +
                " --out " + dir.str() + "/empty"),
            3);
}

TEST(Cli, FullPipeline) {
  TempDir dir("pida2c_cli_pipeline");
  write_config(dir.path / "cfg.json", kTinyMultiConfig);
  const std::string cfg = (dir.path / "cfg.json").string();
  const std::string out = dir.str() + "/run";
  ASSERT_EQ(run("PID_A2C_LOG=debug " + g_binary + " train --config " + cfg +
                    " --out " + out + " >/dev/null 2>&1",
                /*raw=*/true),
            0);
  EXPECT_EQ(run("test --config " + cfg + " --out " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "test_results.csv"));
  EXPECT_EQ(run("coeffs --out " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "coefficients.csv"));

  // replot only rewrites the charts, and does so byte-identically
  const auto steps_before = read_file(fs::path(out) / "steps.csv");
  const auto chart_before = read_file(fs::path(out) / "reward_vs_step.svg");
  EXPECT_EQ(run("replot --out " + out), 0);
  EXPECT_EQ(read_file(fs::path(out) / "steps.csv"), steps_before);
  EXPECT_EQ(read_file(fs::path(out) / "reward_vs_step.svg"), chart_before);
}

TEST(Cli, PaperScaleSelectsPaperStepCounts) {
  TempDir dir("pida2c_cli_scale");
  // steps left to the mode default so --scale decides them
  write_config(dir.path / "cfg.json", R"({
    "mode": "single-apple-single-actuator",
    "seed": 1,
    "baseline_runs": 1
  })");
  const std::string cfg = (dir.path / "cfg.json").string();
  ASSERT_EQ(run("train --config " + cfg + " --scale paper --out " +
                dir.str() + "/run"),
            0);
  const auto meta = read_file(dir.path / "run" / "meta.json");
  EXPECT_NE(meta.find("\"scale\": \"paper\""), std::string::npos);
  EXPECT_NE(meta.find("\"steps\": 1000"), std::string::npos);
  // 1000 learning steps + header in the record file
  const auto steps = read_file(dir.path / "run" / "steps.csv");
  int lines = 0;
  for (char ch : steps)
    if (ch == '\n') ++lines;
  EXPECT_GE(lines, 1001);
}

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  if (argc < 2) {
    std::fprintf(stderr, "usage: cli_test <path-to-pid_a2c-binary>\n");
    return 1;
  }
  g_binary = argv[1];
  return RUN_ALL_TESTS();
}
