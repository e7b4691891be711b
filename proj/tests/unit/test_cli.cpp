#include <gtest/gtest.h>
#include <sys/wait.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(RADLAB_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  for (std::size_t n; (n = fread(buf.data(), 1, buf.size(), pipe)) > 0;) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("radlab_cli_" + name);
  fs::remove_all(d);
  return d;
}

// Value printed on the "name = value" line of the constants output.
double constant(const std::string& out, const std::string& name) {
  const auto pos = out.find("\n" + name + " = ");
  if (pos == std::string::npos) return std::nan("");
  return std::stod(out.substr(pos + name.size() + 4));
}

}  // namespace

TEST(Cli, Constants) {
  auto r = run("constants -N 3 -p 3");
  EXPECT_EQ(r.code, 0);
  EXPECT_NEAR(constant(r.out, "m_dagger"), 2.0, 1e-14) << r.out;
  r = run("constants -N 3 -p 2");
  EXPECT_NEAR(constant(r.out, "mu_star"), 3.0 * std::pow(4.0, -2.0 / 3.0), 1e-12) << r.out;
  r = run("constants -N 3 -p 4");
  EXPECT_NEAR(constant(r.out, "q_bar"), (-8.0 + std::sqrt(448.0)) / 6.0, 1e-12) << r.out;
  r = run("constants -N 3 -p 4 --json");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"q_bar\""), std::string::npos);
}

TEST(Cli, ShootSingleAmplitude) {
  const auto d = fresh_dir("shoot");
  auto r = run("shoot -N 3 -p 5 -q 1.5 -M 0 -a 1 --out " + d.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("GroundStateCandidate"), std::string::npos);
  EXPECT_TRUE(fs::exists(d / "trajectory.csv"));
  EXPECT_NE(slurp(d / "verdict.json").find("\"decay\""), std::string::npos);
  r = run("shoot -N 3 -p 2 -q 1.3333 -M 0 -a 1 --out " + d.string());
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("Crossing"), std::string::npos);
  fs::remove_all(d);
}

TEST(Cli, ShootBracket) {
  const auto d = fresh_dir("bracket");
  auto r = run("shoot -N 3 -p 5 -q 1.5 -M 0.1 --rmax 200 --bracket 0.3 1 --out " + d.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(d / "verdict.json").find("\"bracket_history\""), std::string::npos);
  r = run("shoot -N 3 -p 5 -q 1.5 -M 0.1 --bracket 2 1 --out " + d.string());
  EXPECT_EQ(r.code, 2);
  fs::remove_all(d);
}

TEST(Cli, ScanDeterministic) {
  const auto d1 = fresh_dir("scan1"), d2 = fresh_dir("scan2");
  const std::string args = "scan -N 3 -p 3 -q 1.5 --axis M:0.1:10:4:log --axis a:0.1:10:3:log --rmax 30 --svg";
  EXPECT_EQ(run(args + " --jobs 1 --out " + d1.string()).code, 0);
  EXPECT_EQ(run(args + " --jobs 4 --out " + d2.string()).code, 0);
  for (const char* f : {"scan.csv", "manifest.json", "classification.svg"})
    EXPECT_EQ(slurp(d1 / f), slurp(d2 / f)) << f;
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Cli, ScanUnwritableDirectoryIsIoError) {
  const auto blocker = fresh_dir("blocker");
  { std::ofstream(blocker) << "x"; }
  const auto r = run("scan -N 3 -p 3 --q-critical -a 1 --axis M:0.1:1:2 --out " + (blocker / "sub").string());
  EXPECT_EQ(r.code, 3) << r.out;
  fs::remove(blocker);
}

TEST(Cli, Separable) {
  auto r = run("separable -N 4 -p 5 --bifurcate -k 1");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n1,3,0,"), std::string::npos) << r.out;
  r = run("separable -N 3 -p 2 -M -2");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("TwoRoots"), std::string::npos);
  r = run("separable -N 3 -p 2 -M -1");
  EXPECT_NE(r.out.find("NoRoot"), std::string::npos);
}

TEST(Cli, Verify) {
  const auto report = fs::temp_directory_path() / "radlab_cli_verify.json";
  auto r = run("verify exact --json " + report.string());
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(slurp(report).find("aubin_talenti_reproduction"), std::string::npos);
  fs::remove(report);
  EXPECT_EQ(run("verify pps").code, 0);
  EXPECT_EQ(run("verify bogus").code, 2);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("constants -N 3 -p 0.5").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("--version").code, 0);
}
