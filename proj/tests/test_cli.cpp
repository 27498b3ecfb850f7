#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <string>
#include <sys/wait.h>

namespace {

struct CliResult {
  int status;
  std::string out;
};

CliResult run(const std::string& args) {
  const std::string cmd = std::string(COSETWALK_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  std::string out;
  std::array<char, 4096> buf;
  std::size_t k;
  while ((k = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), k);
  const int st = ::pclose(pipe);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

}  // namespace

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("--help").status, 0);
  EXPECT_EQ(run("").status, 2);
  EXPECT_EQ(run("ball --space kn:0").status, 2);
  EXPECT_EQ(run("entropy --irs perc-kn:2,p=3 --seed 1").status, 2);
  EXPECT_EQ(run("sweep --points 1 --seed 1").status, 2);
  EXPECT_EQ(run("hitting --space full --ratio a --seed 1").status, 2);
  EXPECT_EQ(run("verify").status, 0);
  EXPECT_EQ(run("verify --fixture corrupt-automaton").status, 1);
}

TEST(Cli, BudgetExitCode) {
  EXPECT_EQ(run("entropy --irs trivial --no-such-flag").status, 2);
  const std::string cmd = "COSETWALK_BUDGET=500 " + std::string(COSETWALK_CLI) + " entropy --irs trivial --nmax 10";
  const int st = std::system((cmd + " >/dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(st), 3);
}

TEST(Cli, BallOutputs) {
  const CliResult dot = run("ball --space kn:2 --radius 2 --format dot");
  EXPECT_EQ(dot.status, 0);
  EXPECT_EQ(dot.out.rfind("digraph", 0), 0u);
  const CliResult json = run("ball --space cover:kn=2,p=0.5,seed=4 --radius 2 --format json");
  EXPECT_EQ(json.status, 0);
  EXPECT_NE(json.out.find("\"loops\""), std::string::npos);
}

TEST(Cli, DeterministicAcrossThreads) {
  for (const char* cmd : {"entropy --irs perc-kn:2,p=0.5 --nmax 6 --samples 8 --seed 5",
                          "entropy --irs conj-kn:2 --method rho --n 12 --walks 2000 --seed 5",
                          "sweep --p-grid 0,0.5,1 --nsteps 5 --samples 4 --seed 5",
                          "returns --space cover:kn=2,p=0.4,seed=3 --tail 4 --expected --horizon 50 --walks 500 --seed 5",
                          "hitting --space kn:3 --anchor a --n 20 --walks 3000 --seed 5"}) {
    const CliResult one = run(std::string("--threads 1 ") + cmd);
    const CliResult eight = run(std::string("--threads 8 ") + cmd);
    EXPECT_EQ(one.status, 0) << cmd;
    EXPECT_FALSE(one.out.empty()) << cmd;
    EXPECT_EQ(one.out, eight.out) << cmd;
  }
}

TEST(Cli, ConfigFile) {
  const std::string path = ::testing::TempDir() + "cw_config.json";
  FILE* f = std::fopen(path.c_str(), "w");
  std::fputs("{\"command\": \"returns\", \"space\": \"trivial\", \"exact\": 4}", f);
  std::fclose(f);
  const CliResult a = run("--config " + path);
  const CliResult b = run("returns --space trivial --exact 4");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
}
