#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the CLI with `args`; stderr is discarded.
RunResult run(const std::string& args, const std::string& env = "") {
  std::string cmd = env + (env.empty() ? "" : " ") + ZEBRA_PERC_BIN + std::string(" ") + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string fixture(const std::string& name) { return std::string(ZEBRA_FIXTURE_DIR) + "/" + name; }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

TEST(Cli, EvalClosedForm) {
  RunResult r = run("eval --k 2 --p 0.75 --method closed-form");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out,
            "k,root_mode,p,depth,method,value,ci_low,ci_high,trials,seed\n"
            "2,rooted-k,0.75,0,closed-form,0.888888888889,0.888888888889,0.888888888889,0,0\n");
}

TEST(Cli, EvalJson) {
  RunResult r = run("eval --k 2 --p 0.5 --method brute-force --depth 2 --format json");
  ASSERT_EQ(r.code, 0);
  auto j = nlohmann::json::parse(r.out);
  EXPECT_DOUBLE_EQ(j["value"].get<double>(), 0.9375);
  EXPECT_EQ(j["method"], "brute-force");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("eval --k 1 --p 0.5").code, 2);
  EXPECT_EQ(run("eval --k 2 --p 1.5").code, 2);
  EXPECT_EQ(run("eval --k 2").code, 2);
  EXPECT_EQ(run("eval --k 2 --p 0.5 --method nope").code, 2);
  EXPECT_EQ(run("eval --k 2 --p 0.5 --bogus").code, 2);
  EXPECT_EQ(run("eval --k 2 --p 0.9 --method fixed-point --max-iter 1").code, 3);
  EXPECT_EQ(run("eval --k 4 --p 0.5 --method closed-form").code, 4);
  EXPECT_EQ(run("eval --k 3 --p 0.5 --method brute-force --depth 3").code, 4);
  EXPECT_EQ(run("critical --k 2 --mode zebra-dp").code, 5);
  EXPECT_EQ(run("critical --k 2 --mode zebra-mc").code, 5);
  EXPECT_EQ(run("transform-demo --k 2 --depth 3").code, 2);
  EXPECT_EQ(run("eval --k 2 --p 0.5", "ZEBRA_PERC_THREADS=x").code, 2);
}

TEST(Cli, SweepRowsAndJson) {
  RunResult r = run("sweep --k 3 --methods fixed-point,dp,relation --steps 11");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(line_count(r.out), 1U + 33U);
  RunResult j = run("sweep --k 3 --methods fixed-point --steps 5 --format json");
  ASSERT_EQ(j.code, 0);
  EXPECT_EQ(nlohmann::json::parse(j.out).size(), 5U);
}

TEST(Cli, SweepDeterministicAcrossThreads) {
  const std::string args = "sweep --k 3 --methods mc --event zebra --depth 8 --trials 2000 --seed 5 --steps 5";
  RunResult a = run(args, "ZEBRA_PERC_THREADS=1");
  RunResult b = run(args, "ZEBRA_PERC_THREADS=4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, CriticalDp) {
  RunResult r = run("critical --k 3 --mode zebra-dp");
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "k,root_mode,mode,side,value,reference,abs_gap");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    double gap = std::stod(line.substr(line.rfind(',') + 1));
    EXPECT_LT(gap, 1e-3) << line;
  }
  EXPECT_EQ(rows, 2);
}

TEST(Cli, VerifyRelationWritesCsv) {
  std::filesystem::path csv = std::filesystem::temp_directory_path() / "zebra_cli_relation.csv";
  RunResult r = run("verify --suite relation --output " + csv.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(csv);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(line_count(ss.str()), 1U + 202U);
  EXPECT_EQ(run("verify --suite nope").code, 2);
}

TEST(Cli, TransformDemoFixtures) {
  RunResult open = run("transform-demo --k 2 --sigma-file " + fixture("all_open_k2_d2.txt"));
  ASSERT_EQ(open.code, 0);
  EXPECT_NE(open.out.find("# phi depth=1\n0,0\n1,0\n2,0\n3,0\n"), std::string::npos) << open.out;
  EXPECT_NE(open.out.find("# witness open-first/plus: none (phi ray absent)"), std::string::npos);

  RunResult alt = run("transform-demo --k 2 --sigma-file " + fixture("alternating_k2_d2.txt"));
  ASSERT_EQ(alt.code, 0);
  EXPECT_NE(alt.out.find("# witness open-first/plus: sigma 0/0 phi 0 (phi ray present)"), std::string::npos)
      << alt.out;
  EXPECT_NE(alt.out.find("# witness closed-first/minus: none (phi ray absent)"), std::string::npos);

  EXPECT_EQ(run("transform-demo --k 2 --sigma-file " + fixture("odd_depth_incomplete.txt")).code, 2);
  EXPECT_EQ(run("transform-demo --k 2 --sigma-file /nonexistent/file").code, 2);
}

TEST(Cli, TransformDemoSampled) {
  RunResult a = run("transform-demo --k 3 --depth 4 --seed 8");
  RunResult b = run("transform-demo --k 3 --depth 4 --seed 8");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(run("transform-demo --k 2 --depth 8").code, 4);
}

TEST(Cli, ConfigFileAndOverride) {
  RunResult r = run("eval --config " + fixture("config_k3.json"));
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\n3,rooted-k,0.5,0,closed-form,"), std::string::npos) << r.out;
  RunResult o = run("eval --config " + fixture("config_k3.json") + " --k 2 --p 0.75");
  ASSERT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("\n2,rooted-k,0.75,0,closed-form,0.888888888889,"), std::string::npos) << o.out;
  EXPECT_EQ(run("eval --config " + fixture("config_unknown.json")).code, 2);
}

}  // namespace
