#pragma once

// Command implementations behind the `fptune` executable. Each command
// returns a process exit code: 0 success, 1 infeasible, 2 usage or I/O error.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fptune/kernels.hpp"
#include "fptune/learn.hpp"

namespace fptune {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInfeasible = 1;
inline constexpr int kExitUsage = 2;

std::vector<double> default_targets();

struct RunConfig {
  std::vector<std::string> benchmarks{"saxpy"};
  std::optional<InputShape> input_shape;  // benchmark default when unset
  std::uint64_t seed_input = 1;
  std::uint64_t seed_sampling = 2;
  std::uint64_t seed_train = 3;
  int nbit_min = kDefaultNbitMin;
  int nbit_max = kDefaultNbitMax;
  std::vector<double> targets = default_targets();
  int dataset_size = 1000;
  TrainConfig train;
  int budget = 100;
  std::string mode = "smart_plus";
  std::filesystem::path out = "fptune-out";
  std::optional<std::filesystem::path> dataset;  // load instead of building
  std::vector<int> sizes{100, 500, 1000, 2000, 4000};
  int heldout_size = 500;
  int n_inputs = 30;
  std::vector<int> formats{3, 7, 10, 23};
  std::optional<std::filesystem::path> result;
  double holdout = 0.0;
  double cap = 1e5;
  unsigned threads = 0;
  bool reproducible = false;  // zero the wall-clock fields
  bool quiet = false;
};

// Flat `key = value` file; `#` starts a comment. Unknown keys and malformed
// values throw Error naming the key.
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);
void apply_config_value(RunConfig& cfg, const std::string& key,
                        const std::string& value);
// Throws Error(kInvalidArgument) naming the offending field.
void validate(const RunConfig& cfg);

int cmd_dataset(const RunConfig& cfg, std::ostream& log);
int cmd_train(const RunConfig& cfg, std::ostream& log);
int cmd_tune(const RunConfig& cfg, std::ostream& log);
int cmd_sweep_dataset_size(const RunConfig& cfg, std::ostream& log);
int cmd_eval_transfer(const RunConfig& cfg, std::ostream& log);
int cmd_snap_hw(const RunConfig& cfg, std::ostream& log);
int cmd_oracle(const RunConfig& cfg, std::ostream& log);

// Ceiling mapping of each width onto the sorted format set; widths above the
// largest format map to 52 (binary64).
std::vector<int> snap_up(const std::vector<int>& bits, std::vector<int> formats);

int run_cli(int argc, char** argv);

}  // namespace fptune
