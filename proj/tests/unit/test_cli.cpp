// End-to-end checks of the command-line tool as a subprocess.

#include <catch2/catch_amalgamated.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "support/fixtures.hpp"
#include "vscc/csv.hpp"
#include "vscc/report.hpp"

using namespace vscc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    const auto stamp =
        std::chrono::steady_clock::now().time_since_epoch().count();
    path = fs::temp_directory_path() / ("vscc_cli_" + std::to_string(stamp));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const {
    return (path / name).string();
  }
};

int run_tool(const std::string& args) {
  const std::string cmd =
      std::string(VSCC_TOOL_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

void write_planted_csv(const std::string& path, std::uint64_t seed) {
  Partition truth;
  const auto ds = fixtures::planted_signal_noise(60, 2, 3.0, seed, &truth);
  std::ofstream out(path);
  out << "cls";
  for (const auto& name : ds.var_names) out << ',' << name;
  out << "\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i) {
    out << "g" << truth.labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < ds.p(); ++j) out << ',' << ds.values(i, j);
    out << "\n";
  }
}

std::string masked_report(const std::string& path) {
  // drop the wall-clock column (index 8) before comparing runs
  std::ifstream in(path);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
      if (c == ',') {
        cells.push_back(cell);
        cell.clear();
      } else {
        cell += c;
      }
    }
    cells.push_back(cell);
    if (cells.size() == 10) cells[8] = "-";
    for (std::size_t k = 0; k < cells.size(); ++k)
      out << (k ? "," : "") << cells[k];
    out << "\n";
  }
  return out.str();
}

}  // namespace

TEST_CASE("missing required flags exit with a usage error") {
  REQUIRE(run_tool("") == 1);
  REQUIRE(run_tool("--mode supervised") == 1);  // no --input
}

TEST_CASE("malformed input exits with a data error and no artifacts") {
  TempDir dir;
  std::ofstream(dir.file("bad.csv")) << "a,b\n1,2\n3\n";
  REQUIRE(run_tool("--mode cluster --input " + dir.file("bad.csv") +
                   " --out " + dir.file("out")) == 2);
  REQUIRE(!fs::exists(dir.file("out/report.csv")));
}

TEST_CASE("a single cloud exits with the pipeline error code") {
  TempDir dir;
  const auto ds = fixtures::single_cloud(120, 3, 1001);
  std::ofstream out(dir.file("cloud.csv"));
  out << "V1,V2,V3\n";
  for (Eigen::Index i = 0; i < ds.n(); ++i)
    out << ds.values(i, 0) << ',' << ds.values(i, 1) << ',' << ds.values(i, 2)
        << "\n";
  out.close();
  REQUIRE(run_tool("--mode cluster --input " + dir.file("cloud.csv") +
                   " --g-max 3 --restarts 3 --out " + dir.file("out")) == 3);
}

TEST_CASE("a clustering run emits report, summary and plot") {
  TempDir dir;
  write_planted_csv(dir.file("data.csv"), 1002);
  const int code =
      run_tool("--mode cluster --input " + dir.file("data.csv") +
               " --labels cls --g-max 4 --restarts 3 --seed 7 --out " +
               dir.file("out"));
  REQUIRE(code == 0);
  REQUIRE(fs::exists(dir.file("out/report.csv")));
  REQUIRE(fs::exists(dir.file("out/summary.json")));

  const auto rows = parse_report_csv(dir.file("out/report.csv"));
  REQUIRE(!rows.empty());
  int chosen_count = 0;
  bool has_full_set = false;
  for (const auto& row : rows) {
    chosen_count += row.status == "chosen";
    has_full_set |= row.relationship == "full_set";
    REQUIRE(row.ari.has_value());  // labels were supplied
  }
  REQUIRE(chosen_count == 1);
  REQUIRE(has_full_set);

  // the planted signal lives on V1, V2: expect the 2-variable plot file
  for (const auto& row : rows)
    if (row.status == "chosen" && row.n_vars == 2)
      REQUIRE(fs::exists(dir.file("out/plot.csv")));
}

TEST_CASE("reports are identical across reruns with the same seed") {
  TempDir dir;
  write_planted_csv(dir.file("data.csv"), 1003);
  const std::string base = "--mode cluster --input " + dir.file("data.csv") +
                           " --labels cls --g-max 3 --restarts 3 --seed 11 ";
  REQUIRE(run_tool(base + "--out " + dir.file("a")) == 0);
  REQUIRE(run_tool(base + "--out " + dir.file("b")) == 0);
  REQUIRE(masked_report(dir.file("a/report.csv")) ==
          masked_report(dir.file("b/report.csv")));
}

TEST_CASE("supervised mode without labels is a usage error") {
  TempDir dir;
  write_planted_csv(dir.file("data.csv"), 1004);
  REQUIRE(run_tool("--mode supervised --input " + dir.file("data.csv") +
                   " --out " + dir.file("out")) == 1);
}

TEST_CASE("a small simulate run writes replicate rows") {
  TempDir dir;
  const int code = run_tool(
      "--mode simulate --reps 2 --groups 2 --n-min 25 --n-max 30 --signal 2 "
      "--noise 1 --separation 0.9 --g-min 1 --g-max 3 --restarts 2 --seed 5 "
      "--out " +
      dir.file("out"));
  REQUIRE(code == 0);
  std::ifstream in(dir.file("out/sim_results.csv"));
  std::string header;
  std::getline(in, header);
  REQUIRE(header == "rep_index,ari,runtime_s,n_vars_chosen,relationship,status");
  int rows = 0;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  REQUIRE(rows == 2);
}
