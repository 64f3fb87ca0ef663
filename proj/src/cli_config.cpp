#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "fptune/cli.hpp"
#include "fptune/error.hpp"
#include "text_util.hpp"

namespace fptune {

std::vector<double> default_targets() {
  return {1e-30, 1e-25, 1e-20, 1e-15, 1e-10, 1e-7, 1e-5, 1e-3, 1e-1};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& why) {
  throw Error(ErrorCode::kInvalidArgument,
              key + ": " + why + " (got '" + value + "')");
}

template <typename Int>
Int to_int(const std::string& key, const std::string& value) {
  auto v = text::parse_int<Int>(trim(value));
  if (!v) bad_value(key, value, "expected an integer");
  return *v;
}

double to_double(const std::string& key, const std::string& value) {
  auto v = text::parse_double(value);
  if (!v) bad_value(key, value, "expected a number");
  return *v;
}

bool to_bool(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  bad_value(key, value, "expected true or false");
}

std::vector<std::string> to_list(const std::string& value) {
  std::vector<std::string> out;
  for (auto part : text::split(value, ',')) {
    std::string t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

template <typename Int>
std::vector<Int> to_int_list(const std::string& key, const std::string& value) {
  std::vector<Int> out;
  for (const auto& item : to_list(value)) out.push_back(to_int<Int>(key, item));
  return out;
}

}  // namespace

void apply_config_value(RunConfig& cfg, const std::string& raw_key,
                        const std::string& value) {
  std::string key = trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  if (key == "benchmark" || key == "benchmarks") {
    auto names = to_list(value);
    if (names.size() == 1 && names[0] == "all") names = benchmark_names();
    if (names.empty()) bad_value(key, value, "expected benchmark names");
    cfg.benchmarks = names;
  } else if (key == "input_shape") {
    try {
      cfg.input_shape = parse_shape(trim(value));
    } catch (const Error& e) {
      bad_value(key, value, e.what());
    }
  } else if (key == "seed_input") {
    cfg.seed_input = to_int<std::uint64_t>(key, value);
  } else if (key == "seed_sampling") {
    cfg.seed_sampling = to_int<std::uint64_t>(key, value);
  } else if (key == "seed_train") {
    cfg.seed_train = to_int<std::uint64_t>(key, value);
  } else if (key == "nbit_min") {
    cfg.nbit_min = to_int<int>(key, value);
  } else if (key == "nbit_max") {
    cfg.nbit_max = to_int<int>(key, value);
  } else if (key == "target" || key == "targets") {
    cfg.targets.clear();
    for (const auto& item : to_list(value)) cfg.targets.push_back(to_double(key, item));
  } else if (key == "dataset_size") {
    cfg.dataset_size = to_int<int>(key, value);
  } else if (key == "epochs") {
    cfg.train.epochs = to_int<int>(key, value);
  } else if (key == "batch_size") {
    cfg.train.batch_size = to_int<int>(key, value);
  } else if (key == "learning_rate") {
    cfg.train.learning_rate = to_double(key, value);
  } else if (key == "dt_max_depth") {
    cfg.train.dt_max_depth = to_int<int>(key, value);
  } else if (key == "budget") {
    cfg.budget = to_int<int>(key, value);
  } else if (key == "mode") {
    cfg.mode = trim(value);
  } else if (key == "out") {
    cfg.out = trim(value);
  } else if (key == "dataset") {
    cfg.dataset = trim(value);
  } else if (key == "sizes") {
    cfg.sizes = to_int_list<int>(key, value);
  } else if (key == "heldout_size") {
    cfg.heldout_size = to_int<int>(key, value);
  } else if (key == "n_inputs") {
    cfg.n_inputs = to_int<int>(key, value);
  } else if (key == "formats") {
    cfg.formats = to_int_list<int>(key, value);
  } else if (key == "result") {
    cfg.result = trim(value);
  } else if (key == "holdout") {
    cfg.holdout = to_double(key, value);
  } else if (key == "cap") {
    cfg.cap = to_double(key, value);
  } else if (key == "threads") {
    cfg.threads = to_int<unsigned>(key, value);
  } else if (key == "reproducible") {
    cfg.reproducible = to_bool(key, value);
  } else if (key == "quiet") {
    cfg.quiet = to_bool(key, value);
  } else {
    throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(lineno) +
                                         ":1: expected key = value");
    }
    try {
      apply_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(lineno) + ":1: " +
                                e.what());
    }
  }
}

void validate(const RunConfig& cfg) {
  auto fail = [](const std::string& msg) {
    throw Error(ErrorCode::kInvalidArgument, msg);
  };
  for (const auto& b : cfg.benchmarks) get_benchmark(b);
  if (cfg.nbit_min < 1 || cfg.nbit_min > kDefaultNbitMax) {
    fail("nbit_min must be in [1,52]");
  }
  if (cfg.nbit_max < 1 || cfg.nbit_max > kDefaultNbitMax) {
    fail("nbit_max must be in [1,52]");
  }
  if (cfg.nbit_min > cfg.nbit_max) {
    fail("nbit_min > nbit_max (" + std::to_string(cfg.nbit_min) + " > " +
         std::to_string(cfg.nbit_max) + ")");
  }
  if (cfg.targets.empty()) fail("targets: at least one error target required");
  for (double t : cfg.targets) {
    if (!(t > 0.0) || !std::isfinite(t)) fail("targets: must be positive and finite");
  }
  if (cfg.dataset_size < 1) fail("dataset_size must be >= 1");
  if (cfg.train.epochs < 0) fail("epochs must be >= 0");
  if (cfg.train.batch_size < 1) fail("batch_size must be >= 1");
  if (!(cfg.train.learning_rate > 0.0)) fail("learning_rate must be positive");
  if (cfg.train.dt_max_depth < 0) fail("dt_max_depth must be >= 0");
  if (cfg.budget < 0) fail("budget must be >= 0");
  static const std::set<std::string> modes{"smart", "smart_plus", "baseline"};
  if (!modes.count(cfg.mode)) fail("mode must be smart, smart_plus or baseline");
  if (cfg.sizes.empty()) fail("sizes: at least one size required");
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] < 1) fail("sizes must be positive");
    if (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1]) fail("sizes must be ascending");
  }
  if (cfg.heldout_size < 1) fail("heldout_size must be >= 1");
  if (!(cfg.holdout >= 0.0 && cfg.holdout < 1.0)) fail("holdout must be in [0,1)");
  if (!(cfg.cap > 0.0)) fail("cap must be positive");
  for (int f : cfg.formats) {
    if (f < 1 || f > kDefaultNbitMax) fail("formats must be in [1,52]");
  }
}

std::vector<int> snap_up(const std::vector<int>& bits, std::vector<int> formats) {
  if (formats.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "formats: format set is empty");
  }
  std::sort(formats.begin(), formats.end());
  std::vector<int> out;
  out.reserve(bits.size());
  for (int b : bits) {
    auto it = std::lower_bound(formats.begin(), formats.end(), b);
    out.push_back(it == formats.end() ? kDefaultNbitMax : *it);
  }
  return out;
}

}  // namespace fptune
