#include "fptune/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

#include "fptune/error.hpp"
#include "text_util.hpp"

namespace fptune {

std::vector<std::vector<int>> lhs_strata(int n_vars, int n_samples,
                                         std::uint64_t seed) {
  if (n_vars < 1 || n_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "lhs needs n_vars >= 1 and n_samples >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<int>> strata(n_samples, std::vector<int>(n_vars));
  std::vector<int> perm(n_samples);
  for (int d = 0; d < n_vars; ++d) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int k = 0; k < n_samples; ++k) strata[k][d] = perm[k];
  }
  return strata;
}

std::pair<int, int> lhs_stratum_values(int s, int n, int lo, int hi) {
  const long range = static_cast<long>(hi) - lo + 1;
  const long first = (static_cast<long>(s) * range) / n;
  const long last = ((static_cast<long>(s) + 1) * range - 1) / n;
  return {lo + static_cast<int>(first),
          lo + static_cast<int>(std::max(first, last))};
}

std::vector<PrecisionConfig> lhs_configs(int n_vars, int n_samples, int lo,
                                         int hi, std::uint64_t seed) {
  if (lo > hi) {
    throw Error(ErrorCode::kInvalidRange, "lhs range is empty: lo=" +
                                              std::to_string(lo) +
                                              " > hi=" + std::to_string(hi));
  }
  const auto strata = lhs_strata(n_vars, n_samples, seed);
  // Jitter stream is independent of the permutation stream.
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double range = static_cast<double>(hi) - lo + 1;

  std::vector<PrecisionConfig> out(n_samples,
                                   PrecisionConfig(std::vector<int>(n_vars)));
  for (int k = 0; k < n_samples; ++k) {
    for (int d = 0; d < n_vars; ++d) {
      const int s = strata[k][d];
      const double u = unit(rng);
      const auto [first, last] = lhs_stratum_values(s, n_samples, lo, hi);
      const int v = lo + static_cast<int>(std::floor((s + u) * range / n_samples));
      out[k][d] = std::clamp(v, first, last);
    }
  }
  return out;
}

double compute_error(std::span<const double> out, std::span<const double> ref) {
  if (out.size() != ref.size()) {
    throw Error(ErrorCode::kLengthMismatch,
                "output has " + std::to_string(out.size()) +
                    " elements, reference has " + std::to_string(ref.size()));
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i])) return kInf;
    if (!std::isfinite(ref[i])) return kInf;
    const double diff = out[i] - ref[i];
    const double den = std::max(ref[i] * ref[i], kDenominatorGuard);
    worst = std::max(worst, diff * diff / den);
  }
  return worst;
}

double log_error(double error) {
  if (!(error < std::numeric_limits<double>::infinity())) return -kLogErrorCap;
  const double floor = std::pow(10.0, -kLogErrorCap);
  const double l = -std::log10(std::max(error, floor));
  return std::clamp(l, -kLogErrorCap, kLogErrorCap);
}

int error_class(double error, double threshold) {
  return (error > threshold || std::isnan(error)) ? 1 : 0;
}

Sample sample_from_error(PrecisionConfig config, double error) {
  return Sample{std::move(config), error, log_error(error), error_class(error)};
}

ErrorEvaluator::ErrorEvaluator(const BenchmarkDescriptor& bench, InputSet input)
    : bench_(&bench),
      input_(std::move(input)),
      reference_(run_reference(bench, input_)) {}

double ErrorEvaluator::error(const PrecisionConfig& config) const {
  return compute_error(run_kernel(*bench_, input_, config), reference_);
}

Sample ErrorEvaluator::sample(const PrecisionConfig& config) const {
  return sample_from_error(config, error(config));
}

Sample make_sample(const BenchmarkDescriptor& bench, const InputSet& input,
                   const PrecisionConfig& config) {
  return ErrorEvaluator(bench, input).sample(config);
}

Dataset build_dataset(const BenchmarkDescriptor& bench, const InputSet& input,
                      int n_samples, std::uint64_t seed, int nbit_min,
                      int nbit_max, unsigned threads) {
  if (n_samples < 1) {
    throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  }
  const auto configs = lhs_configs(bench.n_var, n_samples, nbit_min, nbit_max, seed);
  const ErrorEvaluator eval(bench, input);

  Dataset ds;
  ds.benchmark = bench.name;
  ds.input_seed = input.seed;
  ds.input_shape = input.shape;
  ds.sampling_seed = seed;
  ds.nbit_min = nbit_min;
  ds.nbit_max = nbit_max;
  ds.samples.resize(configs.size());

  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, configs.size());
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) ds.samples[k] = eval.sample(configs[k]);
  };
  if (threads <= 1) {
    work(0, configs.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (configs.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk;
      const std::size_t e = std::min(configs.size(), b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
  }
  return ds;
}

std::filesystem::path metadata_path(const std::filesystem::path& csv_path) {
  return std::filesystem::path(csv_path.string() + ".meta.json");
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  const std::size_t n =
      ds.samples.empty() ? 0 : ds.samples.front().config.size();
  {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    for (std::size_t i = 0; i < n; ++i) out << "x_" << i << ",";
    out << "error,log_err,class\n";
    for (const auto& s : ds.samples) {
      for (int b : s.config.bits) out << b << ",";
      out << text::format_double(s.error) << ","
          << text::format_double(s.log_err) << "," << s.class_label << "\n";
    }
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
  }
  nlohmann::json meta = {
      {"benchmark", ds.benchmark},
      {"input_seed", ds.input_seed},
      {"input_shape", to_string(ds.input_shape)},
      {"sampling_seed", ds.sampling_seed},
      {"nbit_min", ds.nbit_min},
      {"nbit_max", ds.nbit_max},
      {"n_vars", n},
      {"n_samples", ds.samples.size()},
  };
  std::ofstream mout(metadata_path(path));
  if (!mout) {
    throw Error(ErrorCode::kIo, "cannot write " + metadata_path(path).string());
  }
  mout << meta.dump(2) << "\n";
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset ds;
  {
    std::ifstream min(metadata_path(path));
    if (!min) {
      throw Error(ErrorCode::kIo, "cannot read " + metadata_path(path).string());
    }
    try {
      const auto meta = nlohmann::json::parse(min);
      ds.benchmark = meta.at("benchmark").get<std::string>();
      ds.input_seed = meta.at("input_seed").get<std::uint64_t>();
      ds.input_shape = parse_shape(meta.at("input_shape").get<std::string>());
      ds.sampling_seed = meta.at("sampling_seed").get<std::uint64_t>();
      ds.nbit_min = meta.at("nbit_min").get<int>();
      ds.nbit_max = meta.at("nbit_max").get<int>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParse,
                  metadata_path(path).string() + ": " + e.what());
    }
  }

  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  const auto fail = [&](std::size_t line, std::size_t col, const std::string& why) {
    throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line) +
                                       ":" + std::to_string(col) + ": " + why);
  };

  std::string line;
  if (!std::getline(in, line)) fail(1, 1, "missing header");
  const auto header = text::split(line, ',');
  if (header.size() < 4) fail(1, 1, "header needs x_0..x_{n-1},error,log_err,class");
  const std::size_t n = header.size() - 3;
  for (std::size_t i = 0; i < n; ++i) {
    if (header[i] != "x_" + std::to_string(i)) {
      fail(1, 1, "expected column x_" + std::to_string(i));
    }
  }
  if (header[n] != "error" || header[n + 1] != "log_err" ||
      !(header[n + 2] == "class" || header[n + 2] == "class\r")) {
    fail(1, 1, "expected trailing columns error,log_err,class");
  }

  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = text::split(line, ',');
    std::size_t col = 1;
    if (fields.size() != n + 3) {
      fail(lineno, 1,
           "expected " + std::to_string(n + 3) + " columns, found " +
               std::to_string(fields.size()));
    }
    Sample s;
    s.config.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto v = text::parse_int<int>(fields[i]);
      if (!v) fail(lineno, col, "expected an integer bit width");
      s.config[i] = *v;
      col += fields[i].size() + 1;
    }
    auto err = text::parse_double(fields[n]);
    if (!err) fail(lineno, col, "expected a number in column 'error'");
    col += fields[n].size() + 1;
    auto lerr = text::parse_double(fields[n + 1]);
    if (!lerr) fail(lineno, col, "expected a number in column 'log_err'");
    col += fields[n + 1].size() + 1;
    auto cls = text::parse_int<int>(fields[n + 2]);
    if (!cls || (*cls != 0 && *cls != 1)) fail(lineno, col, "class must be 0 or 1");
    s.error = *err;
    s.log_err = *lerr;
    s.class_label = *cls;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

}  // namespace fptune
