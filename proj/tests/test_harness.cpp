#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aliased_ac/harness.hpp"

using namespace aliased_ac;
namespace fs = std::filesystem;

namespace {

struct Cli {
  int code = 0;
  std::string out;
  std::string err;
};

Cli run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"aliased-ac"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Cli r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("aliased_ac_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("exact subcommand") {
  const fs::path dir = scratch("exact");
  const Cli r = run_cli({"exact", "--out", dir.string(), "--no-plot"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "results.csv");
  CHECK(csv.rfind("quantity,s,z,a,value\n", 0) == 0);
  CHECK(csv.find("J_star") != std::string::npos);
  CHECK(fs::exists(dir / "report.txt"));
  CHECK_FALSE(fs::exists(dir / "plot.gp"));
  CHECK(r.out.find("J* = 6.775") != std::string::npos);
}

TEST_CASE("td subcommand is deterministic") {
  const fs::path a = scratch("td_a"), b = scratch("td_b");
  const std::vector<std::string> common{"td", "-K", "2000", "--n-seeds", "3", "--mode", "sym", "--trace"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  args_b.insert(args_b.end(), {"--out", b.string(), "--jobs", "2"});
  REQUIRE(run_cli(args_a).code == 0);
  REQUIRE(run_cli(args_b).code == 0);
  CHECK(slurp(a / "results.csv") == slurp(b / "results.csv"));
  CHECK(slurp(a / "results.csv").rfind("seed_index,seed,mode,K,m,B,alpha,error,error_fixed_point,beta_bar_norm\n", 0) == 0);
  CHECK(fs::exists(a / "trace_0.csv"));
}

TEST_CASE("config file with flag override") {
  const fs::path dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.toml");
    cfg << "K = 300\nmode = \"asym\"\nseeds = [0, 4]\n";
  }
  const Cli r = run_cli({"td", "--config", (dir / "run.toml").string(), "-K", "400", "--out", (dir / "o").string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "o" / "results.csv");
  CHECK(csv.find(",asym,400,") != std::string::npos);
  CHECK(csv.find("\n4,") != std::string::npos);
}

TEST_CASE("bounds and sweep subcommands") {
  const fs::path dir = scratch("bounds");
  REQUIRE(run_cli({"bounds", "-K", "1000", "--n-seeds", "2", "--out", dir.string()}).code == 0);
  CHECK(slurp(dir / "results.csv").rfind("mode,K,m,B,gamma", 0) == 0);

  const fs::path sweep = scratch("sweep");
  REQUIRE(run_cli({"sweep", "--grid-K", "200", "400", "--n-seeds", "2", "--out", sweep.string()}).code == 0);
  const std::string csv = slurp(sweep / "results.csv");
  CHECK(csv.rfind("grid_index,K,m,N,T,row,seed_index,seed,metric,status\n", 0) == 0);
  CHECK(csv.find(",mean,") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(run_cli({"td", "--no-such-flag"}).code == kExitValidation);
  CHECK(run_cli({"td", "-K", "0", "--out", scratch("k0").string()}).code == kExitValidation);
  CHECK(run_cli({"exact", "--pomdp", "/nonexistent.json", "--out", scratch("nf").string()}).code == kExitValidation);
  CHECK(run_cli({"exact", "--gamma", "1.2", "--out", scratch("g").string()}).code == kExitValidation);
  CHECK(run_cli({"td", "--mode", "both"}).code == kExitValidation);
  CHECK(run_cli({"exact", "--agent-state", "window:0", "--out", scratch("w0").string()}).code == kExitValidation);

  const fs::path dir = scratch("badjson");
  fs::create_directories(dir);
  {
    std::ofstream bad(dir / "bad.json");
    bad << "{\"states\": [\"a\"],\n \"gamma\": }\n";
  }
  const Cli r = run_cli({"exact", "--pomdp", (dir / "bad.json").string(), "--out", (dir / "o").string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("state revealing environment") {
  const fs::path dir = scratch("revealing");
  const Cli r = run_cli({"exact", "--agent-state", "state_revealing", "--policy", "uniform", "--out", dir.string()});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "results.csv");
  const auto pos = csv.find("aliasing_gap,,,,");
  REQUIRE(pos != std::string::npos);
  CHECK(std::abs(std::stod(csv.substr(pos + 16))) < 1e-12);
}
