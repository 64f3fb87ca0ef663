#pragma once

// The benchmark kernels, executed over emulated reduced-precision values.
//
// Every kernel is decomposed into tunable "slots": program variables plus one
// temporary per static expression. A PrecisionConfig assigns a mantissa width
// to each slot. Values written to a variable are rounded to its slot format;
// operands entering an expression temporary are cast to the temporary's
// format and the operation result is rounded to it as well.
//
// Slot maps and input layouts are documented in docs/kernels.md.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fptune/config.hpp"

namespace fptune {

enum class EdgeKind { kAssignment, kCast };

// Assignment(src -> dst): the value of src is stored into dst, x_src <= x_dst.
// Cast({s...} -> t): the operands s are cast to the temporary t,
// x_t == min(x_s).
struct DependencyEdge {
  EdgeKind kind = EdgeKind::kAssignment;
  std::vector<int> sources;
  int destination = 0;

  bool operator==(const DependencyEdge&) const = default;
};

// Size parameters; the meaning of each entry is benchmark specific.
struct InputShape {
  std::vector<std::size_t> dims;
  bool operator==(const InputShape&) const = default;
};

std::string to_string(const InputShape& shape);
InputShape parse_shape(const std::string& text);

struct BenchmarkDescriptor {
  std::string name;
  int n_var = 0;
  std::vector<std::string> slot_names;
  std::vector<DependencyEdge> edges;
  InputShape default_input_shape;
};

struct InputSet {
  std::string benchmark;
  std::vector<double> values;
  std::uint64_t seed = 0;
  InputShape shape;

  bool operator==(const InputSet&) const = default;
};

// Names accepted by get_benchmark, in canonical order.
const std::vector<std::string>& benchmark_names();

// Throws Error(kUnknownBenchmark) for anything outside benchmark_names().
const BenchmarkDescriptor& get_benchmark(const std::string& name);

const std::vector<DependencyEdge>& dependency_graph(
    const BenchmarkDescriptor& bench);

// Throws Error(kInvalidShape) when `shape` is outside the documented bounds.
void validate_shape(const BenchmarkDescriptor& bench, const InputShape& shape);

InputSet gen_input_set(const BenchmarkDescriptor& bench,
                       const InputShape& shape, std::uint64_t seed);
inline InputSet gen_input_set(const BenchmarkDescriptor& bench,
                              std::uint64_t seed) {
  return gen_input_set(bench, bench.default_input_shape, seed);
}

// Runs the kernel with every slot rounded per `config`. Throws
// Error(kConfigLengthMismatch) when the config arity is wrong.
std::vector<double> run_kernel(const BenchmarkDescriptor& bench,
                               const InputSet& input,
                               const PrecisionConfig& config);

// Binary64 run (all slots at 52 bits).
std::vector<double> run_reference(const BenchmarkDescriptor& bench,
                                  const InputSet& input);

void save_input_set(const InputSet& input, const std::filesystem::path& path);
InputSet load_input_set(const std::filesystem::path& path);

}  // namespace fptune
