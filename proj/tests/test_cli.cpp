#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "fptune/cli.hpp"
#include "fptune/error.hpp"

using namespace fptune;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& leaf) {
  auto dir = fs::temp_directory_path() / "fptune_cli_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "fptune");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

using Table = std::vector<std::map<std::string, std::string>>;

Table read_csv(const fs::path& path) {
  std::ifstream in(path);
  REQUIRE(in);
  auto split = [](const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  Table rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(std::move(row));
  }
  return rows;
}

RunConfig small_config(const fs::path& out) {
  RunConfig cfg;
  cfg.out = out;
  cfg.input_shape = parse_shape("200");
  cfg.dataset_size = 200;
  cfg.train.epochs = 30;
  cfg.quiet = true;
  cfg.reproducible = true;
  return cfg;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("config files set fields and report bad lines") {
  const auto dir = fresh_dir("config");
  {
    std::ofstream f(dir / "run.conf");
    f << "# comment\n"
         "benchmark = saxpy, fwt\n"
         "nbit-min = 4\n"
         "nbit_max = 20   # trailing\n"
         "targets = 1e-3, 1e-5\n"
         "sizes = 10,20\n"
         "reproducible = true\n";
  }
  RunConfig cfg;
  apply_config_file(cfg, dir / "run.conf");
  CHECK(cfg.benchmarks == std::vector<std::string>{"saxpy", "fwt"});
  CHECK(cfg.nbit_min == 4);
  CHECK(cfg.nbit_max == 20);
  CHECK(cfg.targets == std::vector<double>{1e-3, 1e-5});
  CHECK(cfg.sizes == std::vector<int>{10, 20});
  CHECK(cfg.reproducible);
  CHECK_NOTHROW(validate(cfg));

  {
    std::ofstream f(dir / "bad.conf");
    f << "budget = 5\nnot_a_key = 3\n";
  }
  try {
    apply_config_file(cfg, dir / "bad.conf");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find(":2:1:") != std::string::npos);
    CHECK(std::string(e.what()).find("not_a_key") != std::string::npos);
  }
  CHECK_THROWS_AS(apply_config_value(cfg, "budget", "many"), Error);
  RunConfig all;
  apply_config_value(all, "benchmark", "all");
  CHECK(all.benchmarks == benchmark_names());
}

TEST_CASE("validation names the offending field") {
  RunConfig cfg;
  cfg.nbit_min = 9;
  cfg.nbit_max = 4;
  try {
    validate(cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()) == "nbit_min > nbit_max (9 > 4)");
  }
  RunConfig sizes;
  sizes.sizes = {100, 50};
  CHECK_THROWS_AS(validate(sizes), Error);
  RunConfig target;
  target.targets = {0.0};
  CHECK_THROWS_AS(validate(target), Error);
  RunConfig mode;
  mode.mode = "fast";
  CHECK_THROWS_AS(validate(mode), Error);
}

TEST_CASE("snap_up examples") {
  CHECK(snap_up({5, 9, 20}, {3, 7, 10, 23}) == std::vector<int>{7, 10, 23});
  CHECK(snap_up({3, 7, 10, 23}, {3, 7, 10, 23}) == std::vector<int>{3, 7, 10, 23});
  CHECK(snap_up({30, 2}, {23, 10}) == std::vector<int>{52, 10});
  try {
    snap_up({5}, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("formats") != std::string::npos);
  }
}

TEST_CASE("exit codes") {
  const auto dir = fresh_dir("exit");
  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"tune", "--nbit-min", "9", "--nbit-max", "4", "--out", dir.string()}) ==
        kExitUsage);
  CHECK(run({"tune", "--benchmark", "fft", "--out", dir.string()}) == kExitUsage);
  CHECK(run({"transfer", "--n-inputs", "1", "--out", dir.string(), "--quiet"}) == kExitUsage);
  CHECK(run({"oracle", "--nbit-min", "2", "--nbit-max", "52", "--cap", "100", "--quiet",
             "--out", dir.string()}) == kExitUsage);
}

TEST_CASE("tune writes consistent summaries") {
  const auto dir = fresh_dir("tune");
  CHECK(run({"tune", "--benchmark", "saxpy", "--input-shape", "200", "--dataset-size", "200",
             "--epochs", "30", "--target", "1e-1", "--quiet", "--reproducible", "--out",
             dir.string()}) == kExitOk);
  const auto rows = read_csv(dir / "summary_smart_plus.csv");
  REQUIRE(rows.size() == 1);
  for (const auto& row : rows) {
    const double err = std::stod(row.at("actual_error"));
    const double target = std::stod(row.at("target"));
    CHECK((row.at("feasible") == "true" || row.at("feasible") == "1") == (err <= target));
    CHECK(row.at("wall_time_s") == "0");
    CHECK(row.at("benchmark") == "saxpy");
  }
  bool found = false;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("result_saxpy_smart_plus_", 0) != 0) continue;
    found = true;
    std::ifstream in(entry.path());
    const auto j = nlohmann::json::parse(in);
    CHECK(j.at("feasible").get<bool>());
    CHECK(j.at("total_bits").get<long>() <= j.at("initial_total_bits").get<long>());
  }
  CHECK(found);

  // Baseline on the same target, then snap the smart result to hardware formats.
  CHECK(run({"tune", "--benchmark", "saxpy", "--input-shape", "200", "--mode", "baseline",
             "--target", "1e-1", "--quiet", "--reproducible", "--out", dir.string()}) == kExitOk);
  CHECK(read_csv(dir / "summary_baseline.csv").size() == 1);
}

TEST_CASE("sweep with one size gives one row per benchmark") {
  auto cfg = small_config(fresh_dir("sweep"));
  cfg.sizes = {60};
  cfg.heldout_size = 40;
  cfg.benchmarks = {"saxpy"};
  CHECK(cmd_sweep_dataset_size(cfg, std::cout) == kExitOk);
  const auto rows = read_csv(cfg.out / "sweep.csv");
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].at("size") == "60");
  CHECK(std::stod(rows[0].at("accuracy")) >= 0.0);
  CHECK(std::stod(rows[0].at("accuracy")) <= 1.0);
}

TEST_CASE("transfer percentages lie in [0, 100]") {
  auto cfg = small_config(fresh_dir("transfer"));
  cfg.n_inputs = 3;
  cfg.targets = {1e-3};
  CHECK(cmd_eval_transfer(cfg, std::cout) == kExitOk);
  const auto rows = read_csv(cfg.out / "transfer.csv");
  REQUIRE(rows.size() == 1);
  for (const char* key : {"smart_violation_pct", "baseline_violation_pct"}) {
    const double pct = std::stod(rows[0].at(key));
    CHECK(pct >= 0.0);
    CHECK(pct <= 100.0);
  }
}

TEST_CASE("oracle and snap-hw on a small domain") {
  auto cfg = small_config(fresh_dir("oracle"));
  cfg.nbit_min = 4;
  cfg.nbit_max = 12;
  cfg.targets = {1e-3};
  CHECK(cmd_oracle(cfg, std::cout) == kExitOk);
  const auto rows = read_csv(cfg.out / "oracle.csv");
  REQUIRE(rows.size() == 1);

  cfg.mode = "baseline";
  CHECK(cmd_tune(cfg, std::cout) == kExitOk);
  fs::path result;
  for (const auto& entry : fs::directory_iterator(cfg.out)) {
    if (entry.path().filename().string().rfind("result_saxpy_baseline_", 0) == 0) {
      result = entry.path();
    }
  }
  REQUIRE_FALSE(result.empty());
  // Baseline can never beat the exhaustive optimum.
  std::ifstream in(result);
  const auto j = nlohmann::json::parse(in);
  CHECK(j.at("total_bits").get<long>() >= std::stol(rows[0].at("total_bits")));

  cfg.result = result;
  cfg.formats = {3, 7, 10, 23};
  const int code = cmd_snap_hw(cfg, std::cout);
  std::ifstream snapped(cfg.out / (result.stem().string() + "_snapped.json"));
  REQUIRE(snapped);
  const auto s = nlohmann::json::parse(snapped);
  const auto bits = j.at("config").get<std::vector<int>>();
  CHECK(s.at("config").get<std::vector<int>>() == snap_up(bits, cfg.formats));
  CHECK(code == (s.at("feasible").get<bool>() ? kExitOk : kExitInfeasible));
}

}  // TEST_SUITE
