#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

#include "polygreen/reporting.hpp"

using namespace polygreen;

namespace {

int run_cli(const std::string& args, const std::string& stdout_path = "cli_stdout.txt",
            const std::string& stderr_path = "cli_stderr.txt") {
  std::string cmd = std::string(POLYGREEN_CLI_PATH) + " " + args + " >" + stdout_path +
                    " 2>" + stderr_path;
  int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

json disk_config(const std::string& outdir) {
  json j;
  j["domain"] = {{"kind", "unit-ball"}, {"dim", 2}};
  j["m"] = 1;
  j["n"] = 2;
  j["grid_levels"] = {1.0 / 32, 1.0 / 48};
  j["samples"] = {{"count", 40}, {"seed", 3}};
  j["output_dir"] = outdir;
  return j;
}

}  // namespace

TEST_CASE("fundsol prints the kernel value") {
  REQUIRE(run_cli("fundsol --m 1 --n 3 --r 0.5") == 0);
  std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("r,value") == 0);
  CHECK(out.find("0.15915494309189") != std::string::npos);
}

TEST_CASE("fundsol ray with derivative column") {
  REQUIRE(run_cli("fundsol --m 2 --n 3 --rmin 0.1 --rmax 1.0 --count 10 --alpha 1,0,0") ==
          0);
  std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("r,value,derivative") == 0);
  int lines = 0;
  for (char c : out)
    if (c == '\n') ++lines;
  CHECK(lines == 11);
}

TEST_CASE("invalid derivative order exits with a config diagnostic") {
  json j = disk_config("cli_out_bad");
  j["m"] = 2;
  j["n"] = 3;
  j["domain"] = {{"kind", "unit-ball"}, {"dim", 3}};
  j["bounds"] = json::array({{{"target", "green-odd-high"}, {"i", 2}, {"j", 1}}});
  write_file("cli_bad.json", j.dump());
  CHECK(run_cli("verify-green --config cli_bad.json") == 2);
  std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("lambda") != std::string::npos);
  CHECK(err.find("bounds[0]") != std::string::npos);
}

TEST_CASE("missing config exits 2") {
  CHECK(run_cli("verify-green --config does_not_exist.json") == 2);
}

TEST_CASE("verify-green end to end with byte-identical reruns") {
  write_file("cli_disk.json", disk_config("cli_out_a").dump());
  REQUIRE(run_cli("verify-green --config cli_disk.json") == 0);
  REQUIRE(run_cli("verify-green --config cli_disk.json --out cli_out_b") == 0);
  // identical CSVs across reruns
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator("cli_out_a"))
    if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  REQUIRE(names.size() >= 2);
  for (const auto& name : names)
    CHECK(slurp("cli_out_a/" + name) == slurp("cli_out_b/" + name));
  // summary records the pass verdict
  json summary;
  std::ifstream("cli_out_a/summary.json") >> summary;
  CHECK(summary["pass"].get<bool>());
}

TEST_CASE("counterexample subcommand") {
  CHECK(run_cli("counterexample --m 2 --n 3 --out cli_out_ce") == 0);
  std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("[pass]") != std::string::npos);
  CHECK(err.find("[FAIL]") == std::string::npos);
  CHECK(run_cli("counterexample --m 1 --n 3") == 2);  // lambda = 0 rejected
}

TEST_CASE("hardy subcommand and report merging") {
  json j = disk_config("cli_out_hardy");
  j["hardy"] = {{"trials", 8}};
  write_file("cli_hardy.json", j.dump());
  REQUIRE(run_cli("hardy --config cli_hardy.json") == 0);
  REQUIRE(run_cli("report cli_out_a cli_out_hardy cli_out_ce --out cli_merged.json") == 0);
  json merged;
  std::ifstream("cli_merged.json") >> merged;
  CHECK(merged["runs"].size() >= 3);
  CHECK(merged["pass"].get<bool>());
}

TEST_CASE("green dump subcommand") {
  json j = disk_config("cli_out_green");
  j["grid_levels"] = {1.0 / 32};
  j["source_point"] = {0.25, 0.0};
  write_file("cli_green.json", j.dump());
  REQUIRE(run_cli("green --config cli_green.json") == 0);
  CHECK(std::filesystem::exists("cli_out_green/green.bin"));
  CHECK(std::filesystem::exists("cli_out_green/regular.bin"));
  CHECK(std::filesystem::exists("cli_out_green/green_slice.csv"));
  json summary;
  std::ifstream("cli_out_green/green.json") >> summary;
  CHECK(summary["snap_distance"].get<double>() <= 1.0 / 32);
}

TEST_CASE("decay subcommand end to end") {
  json j = disk_config("cli_out_decay");
  j["grid_levels"] = {1.0 / 48, 1.0 / 64};
  j["decay"] = {{"mode", "both"}, {"R", 0.25}, {"r", 0.3}};
  write_file("cli_decay.json", j.dump());
  CHECK(run_cli("decay --config cli_decay.json") == 0);
  json summary;
  std::ifstream("cli_out_decay/decay.json") >> summary;
  CHECK(summary["pass"].get<bool>());
  CHECK(summary["interior"]["stable"].get<bool>());
  CHECK(summary["infinity"]["stable"].get<bool>());
}

TEST_CASE("dirichlet-bound subcommand end to end") {
  json j;
  j["domain"] = {{"kind", "rectangle"}, {"dim", 2}, {"sides", {1.0, 1.0}}};
  j["m"] = 2;
  j["n"] = 2;
  j["grid_levels"] = {1.0 / 32, 1.0 / 48};
  j["samples"] = {{"count", 20}, {"seed", 4}};
  j["output_dir"] = "cli_out_db";
  write_file("cli_db.json", j.dump());
  CHECK(run_cli("dirichlet-bound --config cli_db.json") == 0);
  json summary;
  std::ifstream("cli_out_db/dirichlet.json") >> summary;
  CHECK(summary["pass"].get<bool>());
  CHECK(summary["sets"].size() == 3);
}
