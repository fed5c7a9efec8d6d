#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

struct Result {
  int status = -1;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(CURIEFIELD_BIN) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    return r;
  }
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) {
    r.out += buf.data();
  }
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("curiefield-cli-" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

}  // namespace

TEST(Cli, ListPlainAndJson) {
  const auto plain = run("list");
  EXPECT_EQ(plain.status, 0);
  EXPECT_NE(plain.out.find("verify-functional-subcritical"), std::string::npos);
  const auto json = run("list --json");
  ASSERT_EQ(json.status, 0);
  const auto j = nlohmann::json::parse(json.out);
  ASSERT_EQ(j.size(), 14u);
  for (const auto& row : j) {
    EXPECT_FALSE(row["anchor"].get<std::string>().empty());
  }
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(run("verify-nothing --seed 1").status, 2);
  EXPECT_EQ(run("verify-subcritical --out-dir " + dir.string()).status, 3);  // no seed
  EXPECT_EQ(run("verify-subcritical --seed 1 --beta 2 --n 64 --replicas 100 --out-dir " + dir.string()).status, 3);
  EXPECT_EQ(run("verify-subcritical --seed x").status, 3);
  EXPECT_EQ(run("verify-series --format xml --out-dir " + dir.string()).status, 3);
  EXPECT_EQ(run("verify-series --bogus 1").status, 3);
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("verify-series --out-dir " + (dir / "file" / "sub").string()).status, 4);
  EXPECT_EQ(run("verify-series --config " + (dir / "missing.cfg").string()).status, 4);
}

TEST(Cli, PassingRunWritesJsonAndCsv) {
  const auto dir = scratch("pass");
  const auto r = run("verify-definetti --n 12 --beta 0.8 --out-dir " + dir.string());
  EXPECT_EQ(r.status, 0) << r.out;
  std::ifstream in(dir / "verify-definetti.json");
  const auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["schema"], "1");
  EXPECT_TRUE(j["passed"].get<bool>());
  EXPECT_LE(j["statistics"]["tv[n=12,beta=0.8]"].get<double>(), 1e-8);
  EXPECT_EQ(first_line(dir / "verify-definetti_tv.csv"), "n,beta,tv");
}

TEST(Cli, FailingVerdictExitsOne) {
  const auto dir = scratch("fail");
  // Ten replicas cannot bring the KS distance under 0.02.
  const auto r = run("verify-subcritical --seed 1 --n 64,128 --replicas 10 --format json --out-dir " + dir.string());
  EXPECT_EQ(r.status, 1) << r.out;
  EXPECT_TRUE(fs::exists(dir / "verify-subcritical.json"));
  EXPECT_FALSE(fs::exists(dir / "verify-subcritical_histogram.csv"));
}

TEST(Cli, ConfigFileWithFlagOverride) {
  const auto dir = scratch("config");
  std::ofstream(dir / "run.cfg") << "# sweep\nbeta = 0.5\nn = 64, 256\nreplicas = 2000\nseed = 9\n";
  run("verify-subcritical --config " + (dir / "run.cfg").string() + " --format csv --out-dir " +
                     (dir / "a").string());
  EXPECT_EQ(first_line(dir / "a" / "verify-subcritical_histogram.csv"), "bin_left,bin_right,count,density");
  EXPECT_EQ(first_line(dir / "a" / "verify-subcritical_cdf.csv"), "x,empirical,limit");
  std::ofstream(dir / "run.json") << R"({"beta": 0.5, "n": [64, 256], "replicas": 2000, "seed": 9})";
  run("verify-subcritical --config " + (dir / "run.json").string() + " --out-dir " + (dir / "b").string());
  run("verify-subcritical --config " + (dir / "run.cfg").string() + " --out-dir " + (dir / "c").string());
  run("verify-subcritical --config " + (dir / "run.cfg").string() + " --seed 10 --out-dir " + (dir / "d").string());
  auto stats = [&](const char* sub) {
    std::ifstream in(dir / sub / "verify-subcritical.json");
    return nlohmann::json::parse(in)["statistics"];
  };
  EXPECT_EQ(stats("b"), stats("c"));
  EXPECT_NE(stats("c"), stats("d"));
}

TEST(Cli, OutDirFromEnvironment) {
  const auto dir = scratch("env");
  const std::string cmd = "CURIEFIELD_OUT_DIR=" + dir.string() + " " + CURIEFIELD_BIN + " verify-series > /dev/null";
  EXPECT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "verify-series.json"));
}
