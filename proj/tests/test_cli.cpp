#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oversmooth/core.hpp"
#include "oversmooth/experiments.hpp"

namespace fs = std::filesystem;
using namespace oversmooth;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = std::string(OVERSMOOTH_CLI_PATH) + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
  int rc = pclose(pipe);
  res.status = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  return res;
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("cli_out") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  fs::path p = dir / "exp.cfg";
  std::ofstream out(p);
  out << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<fs::path> find_files(const fs::path& root, const std::string& name) {
  std::vector<fs::path> hits;
  if (fs::exists(root))
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file() && e.path().filename() == name) hits.push_back(e.path());
  return hits;
}

const char* kTinyRates =
    "n = 128\n"
    "wavelet_order = 7\n"
    "noise_grid = 3e-4,1e-3,3e-3,1e-2\n"
    "repetitions = 1\n"
    "seed = 7\n"
    "penalty.kind = besov-sequence\n"
    "penalty.r = 2\npenalty.p = 2\npenalty.q = 1\npenalty.u = 1\n"
    "smoothness.s = 0.5\nsmoothness.a = 2\n"
    "rho = 3\n"
    "rule = apriori-stoch\n"
    "c_alpha = 100\n"
    "target = l2\n";

}  // namespace

TEST_CASE("no arguments: usage text and exit 2") {
  RunResult res = run_cli("");
  CHECK(res.status == 2);
  CHECK(res.output.find("Usage") != std::string::npos);
}

TEST_CASE("unknown flag: exit 2") {
  RunResult res = run_cli("--frobnicate");
  CHECK(res.status == 2);
}

TEST_CASE("filters order 1 prints the haar taps") {
  RunResult res = run_cli("filters --order 1");
  CHECK(res.status == 0);
  CHECK(res.output.find("0.707106781186547") != std::string::npos);
}

TEST_CASE("filters rejects unsupported orders") {
  RunResult res = run_cli("filters --order 11");
  CHECK(res.status == 1);
  CHECK(res.output.find("unsupported-order") != std::string::npos);
}

TEST_CASE("help enumerates every config key") {
  RunResult res = run_cli("--help");
  CHECK(res.status == 0);
  for (const auto& key : config_keys()) {
    CAPTURE(key);
    CHECK(res.output.find(key) != std::string::npos);
  }
}

TEST_CASE("missing config file: config error, exit 1") {
  RunResult res = run_cli("rates --config does_not_exist.cfg");
  CHECK(res.status == 1);
  CHECK(res.output.find("io-error") != std::string::npos);
}

TEST_CASE("invalid config: named violation, exit 1") {
  fs::path dir = fresh_dir("invalid");
  std::string cfg = write_config(dir, "n = 1000\n");
  RunResult res = run_cli("rates --config " + cfg + " --out " + (dir / "out").string());
  CHECK(res.status == 1);
  CHECK(res.output.find("power of two") != std::string::npos);
}

TEST_CASE("tiny rates run: files, summary line, determinism") {
  fs::path dir = fresh_dir("rates");
  std::string cfg = write_config(dir, kTinyRates);

  RunResult a = run_cli("rates --config " + cfg + " --out " + (dir / "a").string());
  CHECK(a.status == 0);
  CHECK(a.output.find("slope(L2)=") != std::string::npos);
  CHECK(a.output.find("rates.csv") != std::string::npos);

  auto csv_a = find_files(dir / "a", "rates.csv");
  REQUIRE(csv_a.size() == 1);
  RateTable t = read_rate_csv(csv_a.front().string());
  CHECK(t.rows.size() == 4);
  for (const auto& row : t.rows) CHECK(row.flag.empty());
  auto svg_a = find_files(dir / "a", "rates.svg");
  REQUIRE(svg_a.size() == 1);

  RunResult b = run_cli("rates --config " + cfg + " --out " + (dir / "b").string());
  CHECK(b.status == 0);
  auto csv_b = find_files(dir / "b", "rates.csv");
  REQUIRE(csv_b.size() == 1);
  CHECK(slurp(csv_a.front()) == slurp(csv_b.front()));

  // seed override changes the realization
  RunResult c = run_cli("rates --config " + cfg + " --seed 8 --out " + (dir / "c").string());
  CHECK(c.status == 0);
  auto csv_c = find_files(dir / "c", "rates.csv");
  REQUIRE(csv_c.size() == 1);
  CHECK(slurp(csv_a.front()) != slurp(csv_c.front()));
}

TEST_CASE("kfun emits the requested grid") {
  fs::path dir = fresh_dir("kfun");
  std::string cfg = write_config(dir, std::string(kTinyRates) + "t_min = 1e-3\nt_max = 10\nt_count = 12\n");
  RunResult res = run_cli("kfun --config " + cfg + " --out " + (dir / "out").string());
  CHECK(res.status == 0);
  auto files = find_files(dir / "out", "kfun.csv");
  REQUIRE(files.size() == 1);
  std::istringstream in(slurp(files.front()));
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 12);
}

TEST_CASE("solve writes a report and solution table") {
  fs::path dir = fresh_dir("solve");
  std::string cfg = write_config(dir, std::string(kTinyRates) + "alpha = 1e-4\n");
  RunResult res = run_cli("solve --config " + cfg + " --out " + (dir / "out").string());
  CHECK(res.status == 0);
  REQUIRE(find_files(dir / "out", "report.txt").size() == 1);
  auto sol = find_files(dir / "out", "solution.csv");
  REQUIRE(sol.size() == 1);
  std::string text = slurp(sol.front());
  CHECK(text.rfind("x,truth,data,estimate\n", 0) == 0);
}

TEST_CASE("denoise runs the identity shortcut") {
  fs::path dir = fresh_dir("denoise");
  std::string cfg = write_config(dir, std::string(kTinyRates) + "alpha = 1e-3\n");
  RunResult res = run_cli("denoise --config " + cfg + " --out " + (dir / "out").string());
  CHECK(res.status == 0);
  CHECK(find_files(dir / "out", "solution.csv").size() == 1);
}
