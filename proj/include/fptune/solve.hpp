#pragma once

// Precision tuning: the model-based minimization of total bits, the
// retrain-and-cut refinement loop around it, the binary-search improvement
// pass, the generate-and-test baseline and an exhaustive oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "fptune/config.hpp"
#include "fptune/dataset.hpp"
#include "fptune/embed.hpp"
#include "fptune/kernels.hpp"
#include "fptune/learn.hpp"

namespace fptune {

// Slack applied to interval bounds before pruning a search node.
inline constexpr double kBoundSlack = 1e-6;
inline constexpr int kDefaultBudget = 100;
inline constexpr double kDefaultBruteForceCap = 1e5;

struct TuningProblem {
  std::string benchmark;
  int n_var = 0;
  std::vector<DependencyEdge> edges;
  double error_target = 0.0;
  double l_target = 0.0;  // -log10(error_target)
  DomainBox domains;
  std::set<PrecisionConfig> nogood_cuts;
};

// Throws Error(kNonpositiveTarget) unless error_target > 0, and
// Error(kInvalidRange) for malformed domains.
TuningProblem build_problem(const BenchmarkDescriptor& bench,
                            double error_target, const DomainBox& domains);

struct Solution {
  PrecisionConfig config;
  long objective = 0;
  double predicted_logerr = 0.0;
  int classifier_c = 0;
};

struct SolveOptions {
  long node_limit = 0;  // 0: unlimited
};

struct SolveStats {
  long nodes = 0;
  bool complete = true;  // false when the node limit stopped the search
};

struct SolveResult {
  std::optional<Solution> solution;  // nullopt: infeasible
  SolveStats stats;
};

// Exact branch-and-bound over the integer domains minimizing the total bits
// subject to predict_logerr >= l_target, classify == 0, the dependency
// constraints and the no-good cuts. Throws Error(kArityMismatch) when the
// models do not match the problem arity.
SolveResult solve_mp(const TuningProblem& problem, const MlpModel& reg,
                     const DtModel& cls, const SolveOptions& options = {});

// Tightens `box` to the dependency constraints; false if a domain empties.
bool propagate_dependencies(DomainBox& box,
                            const std::vector<DependencyEdge>& edges);
bool satisfies_dependencies(const PrecisionConfig& config,
                            const std::vector<DependencyEdge>& edges);
// Cast targets are reset to the minimum of their sources, then widths are
// only raised until every constraint holds. Always terminates.
PrecisionConfig repair_dependencies(PrecisionConfig config,
                                    const std::vector<DependencyEdge>& edges);

// Counts kernel runs of an ErrorEvaluator.
class ErrorProbe {
 public:
  using Fn = std::function<double(const PrecisionConfig&)>;

  ErrorProbe(std::size_t arity, std::vector<DependencyEdge> edges, Fn fn);
  explicit ErrorProbe(const ErrorEvaluator& eval);

  std::size_t arity() const { return arity_; }
  const std::vector<DependencyEdge>& edges() const { return edges_; }
  double error(const PrecisionConfig& config);
  long runs() const { return runs_; }

 private:
  std::size_t arity_;
  std::vector<DependencyEdge> edges_;
  Fn fn_;
  long runs_ = 0;
};

enum class TuneStatus {
  kFeasible,
  kBudgetExhausted,
  kSolverInfeasible,
  kInfeasibleAtMax,
};

const char* to_string(TuneStatus status);

struct TunedResult {
  Solution solution;
  double actual_error = 0.0;
  bool feasible = false;  // actual_error <= error_target
  TuneStatus status = TuneStatus::kFeasible;
  int refinement_iterations = 0;  // solve/run rounds of the model loop
  int refine_passes = 0;          // binary-search passes
  int samples_added = 0;
  long kernel_runs = 0;
  double wall_time_s = 0.0;
  std::string diagnostic;
};

struct SmartTuneOptions {
  int budget = kDefaultBudget;
  SolveOptions solve;
};

// Solve, run, and on a violation add the counterexample to `dataset`,
// retrain both models, cut the config and solve again.
TunedResult smart_tune(const ErrorEvaluator& eval, Dataset dataset,
                       double error_target, const DomainBox& domains,
                       const TrainConfig& tcfg,
                       const SmartTuneOptions& options = {});

// Per-variable binary search for the lowest feasible width, repeated until a
// pass leaves the total unchanged. `start` must be feasible.
TunedResult plus_refine(ErrorProbe& probe, double error_target,
                        const DomainBox& domains, const TunedResult& start);
TunedResult plus_refine(const ErrorEvaluator& eval, double error_target,
                        const DomainBox& domains, const TunedResult& start);

// Generate-and-test baseline: the plus_refine passes started from the all-max
// configuration.
TunedResult fptuning_baseline(ErrorProbe& probe, double error_target,
                              const DomainBox& domains);
TunedResult fptuning_baseline(const ErrorEvaluator& eval, double error_target,
                              const DomainBox& domains);

struct BruteForceResult {
  std::optional<Solution> solution;
  long kernel_runs = 0;
};

// Minimum-total dependency-consistent config with actual error <= target;
// ties go to the lexicographically smallest. Throws Error(kCapExceeded) when
// the domain product exceeds `cap`.
BruteForceResult brute_force_optimum(ErrorProbe& probe, double error_target,
                                     const DomainBox& domains,
                                     double cap = kDefaultBruteForceCap);
BruteForceResult brute_force_optimum(const ErrorEvaluator& eval,
                                     double error_target,
                                     const DomainBox& domains,
                                     double cap = kDefaultBruteForceCap);

nlohmann::json to_json(const TunedResult& result, double error_target);

}  // namespace fptune
