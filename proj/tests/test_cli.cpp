#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "mfrl_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (workdir() / name).string(); }

void write(const std::string& name, const std::string& text) { std::ofstream(path(name)) << text; }

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the CLI, capturing stdout and stderr into files; returns the exit code.
int run(const std::string& args) {
  const std::string cmd = std::string(MFRL_CLI) + " " + args + " > " + path("stdout.txt") + " 2> " + path("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("solve: fd plan writes a value file") {
  write("fd.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "linear"},
                      "solver": "fd", "N": 2, "mesh": 8})");
  REQUIRE(run("solve --plan " + path("fd.json") + " --out " + path("v.bin")) == 0);
  CHECK(slurp(path("v.bin")).substr(0, 5) == "MFRL1");
  CHECK(fs::exists(path("v.bin.json")));
}

TEST_CASE("solve: mc plan") {
  write("mc.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "null"},
                      "solver": "mc", "atoms": [0.0, 1.0], "n_paths": 500, "n_steps": 20, "seed": 4})");
  REQUIRE(run("solve --plan " + path("mc.json") + " --out " + path("mc.csv")) == 0);
  CHECK(slurp(path("mc.csv")).rfind("t,mean,std_error,n_paths,seed\n", 0) == 0);
}

TEST_CASE("solve: error exit codes") {
  write("big.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "linear"},
                       "solver": "fd", "N": 6, "mesh": 128})");
  CHECK(run("solve --plan " + path("big.json") + " --out " + path("big.bin")) == 3);
  CHECK(slurp(path("stderr.txt")).find("10000000") != std::string::npos);

  write("bad.json", R"({"version": 1, "command": "solve", )");
  CHECK(run("solve --plan " + path("bad.json") + " --out " + path("x.bin")) == 2);

  write("unknown.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "linear"},
                           "solver": "fd", "N": 2, "mesh": 8, "colour": "blue"})");
  CHECK(run("solve --plan " + path("unknown.json") + " --out " + path("x.bin")) == 2);

  write("nested.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "linear", "b": 1},
                          "solver": "fd", "N": 2, "mesh": 8})");
  CHECK(run("solve --plan " + path("nested.json") + " --out " + path("x.bin")) == 2);

  write("quad.json", R"({"version": 1, "command": "solve", "problem": {"benchmark": "quadratic"},
                        "solver": "mc", "atoms": [0.0], "n_paths": 10})");
  CHECK(run("solve --plan " + path("quad.json") + " --out " + path("x.csv")) == 3);

  CHECK(run("solve --out " + path("x.bin")) == 2);
  CHECK(run("frobnicate") == 2);
}

TEST_CASE("rate: null benchmark, determinism and N_list length") {
  write("rate.json", R"({"version": 1, "command": "rate", "problem": {"benchmark": "null"},
                        "N_list": [2, 4, 8], "time_points": 2, "configs_per_n": 2,
                        "n_paths": 100, "n_steps": 10, "seed": 5})");
  REQUIRE(run("rate --plan " + path("rate.json") + " --out " + path("r1.csv")) == 0);
  REQUIRE(run("rate --plan " + path("rate.json") + " --out " + path("r2.csv")) == 0);
  const auto a = slurp(path("r1.csv"));
  CHECK(a == slurp(path("r2.csv")));
  CHECK(a.rfind("N,alpha,alpha_cbrt,sup_error,mc_std,notes\n", 0) == 0);
  CHECK(fs::exists(path("r1.csv.json")));
  CHECK(a != "");
  // A different seed changes the Monte Carlo output.
  REQUIRE(run("rate --plan " + path("rate.json") + " --out " + path("r3.csv") + " --seed 6") == 0);
  CHECK(slurp(path("r3.csv")) != a);

  write("short.json", R"({"version": 1, "command": "rate", "problem": {"benchmark": "null"}, "N_list": [2, 4]})");
  CHECK(run("rate --plan " + path("short.json") + " --out " + path("s.csv")) == 2);
}

TEST_CASE("metric") {
  write("d0.json", R"({"type": "empirical", "atoms": [0.0]})");
  write("dpi.json", R"({"type": "empirical", "atoms": [3.141592653589793]})");
  write("d2.json", R"({"type": "empirical", "dim": 2, "atoms": [0.0, 1.0]})");

  REQUIRE(run("metric " + path("d0.json") + " " + path("d0.json")) == 0);
  CHECK(std::stod(slurp(path("stdout.txt"))) == 0.0);

  REQUIRE(run("metric " + path("d0.json") + " " + path("dpi.json")) == 0);
  double series = 0.0;  // rho^2 = (4 / pi) sum_{odd l <= 64} (1 + l^2)^{-3}
  for (int l = 1; l <= 64; l += 2) series += std::pow(1.0 + l * l, -3.0);
  CHECK(std::abs(std::stod(slurp(path("stdout.txt"))) - std::sqrt(4.0 / M_PI * series)) < 1e-10);

  CHECK(run("metric " + path("d0.json") + " " + path("d2.json")) == 2);
  write("broken.json", "{ not json");
  CHECK(run("metric " + path("d0.json") + " " + path("broken.json")) == 2);
}

TEST_CASE("probe and complexity") {
  write("probe.json", R"({"version": 1, "command": "probe", "problem": {"benchmark": "linear"}, "N": 1, "mesh": 16,
                         "epsilons": [0.2, 0.1, 0.05],
                         "targets": [{"t": 0.5, "z": 0.0, "measure": {"type": "empirical", "atoms": [2.0]}}]})");
  REQUIRE(run("probe --plan " + path("probe.json") + " --out " + path("probe.csv")) == 0);
  const auto csv = slurp(path("probe.csv"));
  CHECK(csv.rfind("epsilon,t_gap,z_gap,rho_gap,fit_slope\n", 0) == 0);
  CHECK(csv == slurp(path("stdout.txt")));

  write("cx.json", R"({"version": 1, "command": "complexity", "N_list": [4, 8, 16], "n_trials": 100, "seed": 1})");
  REQUIRE(run("complexity --plan " + path("cx.json") + " --format json") == 0);
  CHECK(slurp(path("stdout.txt")).find("w1_slope") != std::string::npos);
}
