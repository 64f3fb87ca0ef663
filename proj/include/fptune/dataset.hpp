#pragma once

// Training data for the error models: Latin Hypercube sampled precision
// configurations, the measured output error of each, and its transforms.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fptune/config.hpp"
#include "fptune/kernels.hpp"

namespace fptune {

inline constexpr double kClassThreshold = 0.9;
inline constexpr double kLogErrorCap = 40.0;
inline constexpr double kDenominatorGuard = 1e-60;

struct Sample {
  PrecisionConfig config;
  double error = 0.0;    // max squared relative deviation, may be +inf
  double log_err = 0.0;  // -log10(error), clamped to [-cap, cap]
  int class_label = 0;   // 1 iff error > threshold

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::string benchmark;
  std::uint64_t input_seed = 0;
  InputShape input_shape;
  std::uint64_t sampling_seed = 0;
  int nbit_min = kDefaultNbitMin;
  int nbit_max = kDefaultNbitMax;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;
};

// Stratum index per (sample, dimension); each column is a permutation of
// 0..n_samples-1.
std::vector<std::vector<int>> lhs_strata(int n_vars, int n_samples,
                                         std::uint64_t seed);

// Integer Latin Hypercube design over [lo, hi]^n_vars. The range is cut into
// n_samples equal strata per dimension and each stratum is hit once; values
// are the floor of a uniform draw inside the stratum.
std::vector<PrecisionConfig> lhs_configs(int n_vars, int n_samples, int lo,
                                         int hi, std::uint64_t seed);

// Inclusive integer range covered by stratum `s` of `n` strata on [lo, hi].
std::pair<int, int> lhs_stratum_values(int s, int n, int lo, int hi);

// max_i (out_i - ref_i)^2 / max(ref_i^2, 1e-60); +inf if any out_i is not
// finite.
double compute_error(std::span<const double> out, std::span<const double> ref);

double log_error(double error);
int error_class(double error, double threshold = kClassThreshold);
Sample sample_from_error(PrecisionConfig config, double error);

// Caches the binary64 reference output of one (benchmark, input) pair.
class ErrorEvaluator {
 public:
  ErrorEvaluator(const BenchmarkDescriptor& bench, InputSet input);

  const BenchmarkDescriptor& benchmark() const { return *bench_; }
  const InputSet& input() const { return input_; }
  const std::vector<double>& reference() const { return reference_; }

  double error(const PrecisionConfig& config) const;
  Sample sample(const PrecisionConfig& config) const;

 private:
  const BenchmarkDescriptor* bench_;
  InputSet input_;
  std::vector<double> reference_;
};

Sample make_sample(const BenchmarkDescriptor& bench, const InputSet& input,
                   const PrecisionConfig& config);

// Samples are computed in LHS order; `threads` workers may share the work,
// the result is identical for any thread count.
Dataset build_dataset(const BenchmarkDescriptor& bench, const InputSet& input,
                      int n_samples, std::uint64_t seed,
                      int nbit_min = kDefaultNbitMin,
                      int nbit_max = kDefaultNbitMax, unsigned threads = 0);

// CSV at `path` plus a JSON sidecar at `path` + ".meta.json".
void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

std::filesystem::path metadata_path(const std::filesystem::path& csv_path);

}  // namespace fptune
