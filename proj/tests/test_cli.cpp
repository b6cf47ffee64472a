#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <string>
#include <sys/wait.h>

#include "json.hpp"

namespace {

struct RunResult {
  int exit_code;
  std::string output;
};

// Run the CLI with stdout captured; stderr is folded in so error paths can be
// inspected as text too.
RunResult run_cli(const std::string& args) {
  const std::string cmd = std::string(GTL_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) output.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (const char c : text)
    if (c == '\n') ++n;
  return n;
}

}  // namespace

TEST_CASE("thresholds subcommand emits the critical data", "[cli]") {
  const auto r = run_cli("thresholds --k 2 --n 1");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["theta_c"].get<double>() == 5.0 / 6.0);
  CHECK(j["reachable"].get<bool>());
  CHECK(j["thresholds"].contains("1"));
  CHECK(j["thresholds"]["1"].get<double>() == 5.0 / 6.0);

  const auto unreachable = run_cli("thresholds --k 2 --n 0");
  REQUIRE(unreachable.exit_code == 0);
  const auto ju = nlohmann::json::parse(unreachable.output);
  CHECK(ju["theta_c"].get<double>() == 1.5);
  CHECK(!ju["reachable"].get<bool>());
}

TEST_CASE("fixed-points csv lists one row per point", "[cli]") {
  const auto r = run_cli("fixed-points --k 3 --n 1 --theta 0.95 --format csv");
  REQUIRE(r.exit_code == 0);
  CHECK(count_lines(r.output) == 8);  // header + 7 points
  CHECK(r.output.rfind("kind,x,y,positive_law,residual\n", 0) == 0);

  const auto j = run_cli("fixed-points --k 3 --n 1 --theta 0.95");
  REQUIRE(j.exit_code == 0);
  const auto parsed = nlohmann::json::parse(j.output);
  CHECK(parsed["count"].get<int>() == 7);
  CHECK(parsed["points"].size() == 7);
}

TEST_CASE("usage errors exit with code 1", "[cli]") {
  CHECK(run_cli("fixed-points --k 1 --n 1 --theta 0.5").exit_code == 1);
  CHECK(run_cli("fixed-points --k 2 --n 1 --theta 1.0").exit_code == 1);
  CHECK(run_cli("fixed-points --k 2 --n 1 --theta 0.5 --format yaml").exit_code == 1);
  CHECK(run_cli("fixed-points --k 2 --n 1").exit_code == 1);  // --theta required
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("sample --k 2 --n 1 --theta 0.5 --bogus-flag 3").exit_code == 1);
  CHECK(run_cli("sample --k 2 --n 1 --theta 0.3 --branch plus --samples 200").exit_code == 1);
  CHECK(run_cli("sample --k 2 --n 1 --theta 0.9 --branch plus --samples 2 --format csv")
            .exit_code == 1);
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("sample statistics are reproducible byte for byte", "[cli]") {
  const std::string args =
      "sample --k 2 --n 1 --theta 0.9 --branch plus --depth 1 --samples 200 --seed 42";
  const auto r1 = run_cli(args);
  const auto r2 = run_cli(args);
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.output == r2.output);

  const auto j = nlohmann::json::parse(r1.output);
  CHECK(j["sample_count"].get<int>() == 200);
  CHECK(j["mean_g_root"].is_number());
  CHECK(j["std_error"].get<double>() > 0.0);
  CHECK(j["acceptance_rate"].get<double>() > 0.0);

  const auto r3 = run_cli(
      "sample --k 2 --n 1 --theta 0.9 --branch plus --depth 1 --samples 200 --seed 43");
  CHECK(r3.output != r1.output);
}

TEST_CASE("single configuration dump", "[cli]") {
  const auto r = run_cli(
      "sample --k 2 --n 1 --theta 0.9 --branch minus --depth 2 --samples 1 --seed 7 "
      "--format csv");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("vertex_index,depth,parent_index,spin\n", 0) == 0);
  CHECK(count_lines(r.output) == 11);  // header + 10 vertices of the depth-2 binary-ish tree
}

TEST_CASE("phase diagram csv shape", "[cli]") {
  const auto r = run_cli(
      "phase-diagram --k 4 --n 1 --theta-min 0.05 --theta-max 0.95 --steps 10 --format csv");
  REQUIRE(r.exit_code == 0);
  CHECK(count_lines(r.output) == 11);
  CHECK(r.output.rfind("theta,count,positive_count,z0,x0,y0,order_param,residual\n", 0) == 0);

  const auto r2 = run_cli(
      "phase-diagram --k 4 --n 1 --theta-min 0.05 --theta-max 0.95 --steps 10 --format csv");
  CHECK(r2.output == r.output);
}

TEST_CASE("operator check passes on a healthy configuration", "[cli]") {
  const auto r = run_cli("operator-check --k 2 --n 1 --theta 0.9");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  CHECK(j["passed"].get<bool>());
  CHECK(j["checks"].size() >= 4);
}

TEST_CASE("verify prints one line per property", "[cli]") {
  const auto r = run_cli("verify --suite identities");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("ok", 0) == 0);

  const auto rfp = run_cli("verify --suite fixed-points --k 3 --n 1");
  REQUIRE(rfp.exit_code == 0);
  CHECK(count_lines(rfp.output) == 3);
}

TEST_CASE("iterate traces the damped fixed-point run", "[cli]") {
  const auto r =
      run_cli("iterate --k 2 --n 1 --theta 0.9 --steps 10 --start perturb --damping 0.5");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("step,c1,c2,residual\n", 0) == 0);
  CHECK(count_lines(r.output) == 12);  // header + steps+1 iterates

  // undamped, the k-th power inflates the perturbed start past the guard
  const auto rdiv = run_cli("iterate --k 2 --n 1 --theta 0.9 --steps 40 --start perturb");
  CHECK(rdiv.exit_code == 2);
}
