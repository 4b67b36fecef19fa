// End-to-end checks of the brlab binary: exit codes, artifact layout, and
// byte-determinism. The binary path is baked in as CLI_PATH at build time.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "doctest.h"

namespace {

int run_cli(const std::string& args, const std::string& capture = "") {
  std::string cmd = std::string("\"") + CLI_PATH + "\" " + args;
  cmd += capture.empty() ? " > /dev/null 2>&1" : " > " + capture + " 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int line_count(const std::string& text) {
  int lines = 0;
  for (char c : text)
    if (c == '\n') ++lines;
  return lines;
}

}  // namespace

TEST_CASE("models list names the zoo") {
  CHECK(run_cli("models list", "cli_models.txt") == 0);
  const std::string out = slurp("cli_models.txt");
  CHECK(out.find("linear") != std::string::npos);
  CHECK(out.find("p_system") != std::string::npos);
  CHECK(out.find("noncons_demo") != std::string::npos);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run_cli("solve --ub 0,0 --bogus") == 1);
  CHECK(run_cli("nosuchcommand") == 1);
  CHECK(run_cli("wavefan --model linear --family 1") == 1);  // missing --strength
  CHECK(run_cli("compare --model linear --ub 0,0 --eps 1e-1:1e-2:bad") == 1);
  CHECK(run_cli("--help") == 0);
}

TEST_CASE("solve with coincident data writes an empty fan") {
  CHECK(run_cli("solve --model linear --u0 0,0 --ub 0,0 --out-dir cli_z0") == 0);
  const std::string csv = slurp("cli_z0/fan.csv");
  CHECK(line_count(csv) == 2);  // config comment + column header, no pieces
  CHECK(csv.rfind("# config:", 0) == 0);
  CHECK(csv.find("family,type,speed_lo,speed_hi") != std::string::npos);
}

TEST_CASE("solver failures exit 2") {
  CHECK(run_cli("solve --model p_system --u0 1,0 --ub 1.4,0.4", "cli_far.txt") == 2);
  const std::string out = slurp("cli_far.txt");
  CHECK(out.find("error:") != std::string::npos);
}

TEST_CASE("identical solve invocations are byte-identical") {
  const std::string argv =
      "solve --model p_system --gamma 2 --u0 1,0 --ub 0.995,0.01 --out-dir cli_det";
  CHECK(run_cli(argv) == 0);
  const std::string first = slurp("cli_det/fan.csv");
  CHECK(run_cli(argv) == 0);
  CHECK(slurp("cli_det/fan.csv") == first);
}

TEST_CASE("viscous ladder writes per-rung profiles and a manifest") {
  CHECK(run_cli("viscous --model p_system --gamma 2 --ub 0.995,0.01 --u0 1,0 "
                "--eps 0.1 --out-dir cli_vs") == 0);
  const std::string csv = slurp("cli_vs/profile_0.csv");
  CHECK(csv.rfind("# config:", 0) == 0);
  CHECK(csv.find("xi,Q_1,Q_2") != std::string::npos);
  nlohmann::json manifest = nlohmann::json::parse(slurp("cli_vs/ladder.json"));
  CHECK(manifest["failed_rung"] == -1);
  REQUIRE(manifest["rungs"].size() == 1);
  CHECK(manifest["rungs"][0]["epsilon"] == 0.1);
}

TEST_CASE("compare writes convergence rows and threshold summary") {
  CHECK(run_cli("compare --model p_system --gamma 2 --u0 1,0 --ub 0.995,0.01 "
                "--eps 0.1,0.05 --Z 8 --out-dir cli_cm",
                "cli_cm.txt") == 0);
  const std::string csv = slurp("cli_cm/convergence.csv");
  CHECK(line_count(csv) == 4);  // comment + header + 2 rungs
  CHECK(csv.find("epsilon,l1_fan_dist,sup_inner_dist,weighted_tail") !=
        std::string::npos);
  const std::string out = slurp("cli_cm.txt");
  CHECK(out.find("sup_inner_dist non-increasing:") != std::string::npos);
}
