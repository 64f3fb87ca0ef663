#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "fptune/error.hpp"
#include "fptune/solve.hpp"
#include "text_util.hpp"

namespace fptune {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_arity(std::size_t arity, const DomainBox& domains) {
  if (domains.size() != arity) {
    throw Error(ErrorCode::kArityMismatch,
                "domains have " + std::to_string(domains.size()) +
                    " variables, expected " + std::to_string(arity));
  }
}

}  // namespace

ErrorProbe::ErrorProbe(std::size_t arity, std::vector<DependencyEdge> edges, Fn fn)
    : arity_(arity), edges_(std::move(edges)), fn_(std::move(fn)) {}

ErrorProbe::ErrorProbe(const ErrorEvaluator& eval)
    : arity_(static_cast<std::size_t>(eval.benchmark().n_var)),
      edges_(eval.benchmark().edges),
      fn_([&eval](const PrecisionConfig& c) { return eval.error(c); }) {}

double ErrorProbe::error(const PrecisionConfig& config) {
  ++runs_;
  return fn_(config);
}

const char* to_string(TuneStatus status) {
  switch (status) {
    case TuneStatus::kFeasible: return "feasible";
    case TuneStatus::kBudgetExhausted: return "budget_exhausted";
    case TuneStatus::kSolverInfeasible: return "solver_infeasible";
    case TuneStatus::kInfeasibleAtMax: return "infeasible_at_max";
  }
  return "?";
}

TunedResult smart_tune(const ErrorEvaluator& eval, Dataset dataset,
                       double error_target, const DomainBox& domains,
                       const TrainConfig& tcfg, const SmartTuneOptions& options) {
  const auto start = Clock::now();
  TuningProblem problem = build_problem(eval.benchmark(), error_target, domains);
  TunedResult result;
  result.actual_error = std::numeric_limits<double>::infinity();
  result.status = TuneStatus::kBudgetExhausted;
  if (options.budget <= 0) {
    result.diagnostic = "budget is zero";
    result.wall_time_s = seconds_since(start);
    return result;
  }

  MlpModel reg = train_regressor(dataset, tcfg);
  DtModel cls = train_classifier(dataset, tcfg);
  for (int it = 0; it < options.budget; ++it) {
    const SolveResult solved = solve_mp(problem, reg, cls, options.solve);
    ++result.refinement_iterations;
    if (!solved.solution) {
      result.status = TuneStatus::kSolverInfeasible;
      result.diagnostic = solved.stats.complete
                              ? "no configuration satisfies the models"
                              : "node limit reached without a solution";
      break;
    }
    result.solution = *solved.solution;
    const double err = eval.error(result.solution.config);
    ++result.kernel_runs;
    result.actual_error = err;
    if (err <= error_target) {
      result.feasible = true;
      result.status = TuneStatus::kFeasible;
      break;
    }
    dataset.samples.push_back(sample_from_error(result.solution.config, err));
    ++result.samples_added;
    problem.nogood_cuts.insert(result.solution.config);
    if (it + 1 < options.budget) {
      // Each retrain starts from a fresh, still seed-derived initialization.
      TrainConfig round = tcfg;
      round.seed = tcfg.seed + static_cast<std::uint64_t>(it) + 1;
      reg = train_regressor(dataset, round);
      cls = train_classifier(dataset, round);
    }
  }
  if (!result.feasible && result.status == TuneStatus::kBudgetExhausted) {
    result.diagnostic = "budget exhausted after " +
                        std::to_string(result.refinement_iterations) + " iterations";
  }
  result.wall_time_s = seconds_since(start);
  return result;
}

namespace {

// The refinement passes shared by plus_refine and the baseline. `r` holds a
// feasible configuration and its error on entry.
void run_refine_passes(ErrorProbe& probe, double error_target,
                   const DomainBox& domains, TunedResult& r) {
  const auto& edges = probe.edges();
  std::vector<bool> cast_target(probe.arity(), false);
  std::vector<std::vector<int>> assignment_sources(probe.arity());
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::kCast) {
      cast_target[e.destination] = true;
    } else {
      for (int s : e.sources) assignment_sources[e.destination].push_back(s);
    }
  }

  PrecisionConfig& cur = r.solution.config;
  while (true) {
    const long before = cur.total_bits();
    ++r.refine_passes;
    std::vector<int> order(cur.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return cur[a] > cur[b]; });
    for (int v : order) {
      if (cast_target[v]) continue;
      int lo = domains.ranges[v].lo;
      for (int s : assignment_sources[v]) lo = std::max(lo, cur[s]);
      int hi = cur[v];
      while (lo < hi) {
        const int mid = lo + (hi - lo) / 2;
        PrecisionConfig probe_cfg = cur;
        probe_cfg.bits[v] = mid;
        probe_cfg = repair_dependencies(std::move(probe_cfg), edges);
        const double err = probe.error(probe_cfg);
        if (err <= error_target) {
          cur = std::move(probe_cfg);
          r.actual_error = err;
          hi = mid;
        } else {
          lo = mid + 1;
        }
      }
    }
    if (cur.total_bits() == before) break;
  }
  r.solution.objective = cur.total_bits();
}

}  // namespace

TunedResult plus_refine(ErrorProbe& probe, double error_target,
                        const DomainBox& domains, const TunedResult& start) {
  check_arity(probe.arity(), domains);
  const auto t0 = Clock::now();
  const long runs0 = probe.runs();
  TunedResult r = start;
  if (r.feasible) run_refine_passes(probe, error_target, domains, r);
  r.kernel_runs += probe.runs() - runs0;
  r.wall_time_s += seconds_since(t0);
  return r;
}

TunedResult plus_refine(const ErrorEvaluator& eval, double error_target,
                        const DomainBox& domains, const TunedResult& start) {
  ErrorProbe probe(eval);
  return plus_refine(probe, error_target, domains, start);
}

TunedResult fptuning_baseline(ErrorProbe& probe, double error_target,
                              const DomainBox& domains) {
  if (!(error_target > 0.0)) {
    throw Error(ErrorCode::kNonpositiveTarget, "error target must be positive");
  }
  check_arity(probe.arity(), domains);
  const auto t0 = Clock::now();
  const long runs0 = probe.runs();
  TunedResult r;
  PrecisionConfig top;
  for (const auto& d : domains.ranges) top.bits.push_back(d.hi);
  r.solution.config = repair_dependencies(std::move(top), probe.edges());
  r.solution.objective = r.solution.config.total_bits();
  r.actual_error = probe.error(r.solution.config);
  if (r.actual_error <= error_target) {
    r.feasible = true;
    r.status = TuneStatus::kFeasible;
    run_refine_passes(probe, error_target, domains, r);
  } else {
    r.status = TuneStatus::kInfeasibleAtMax;
    r.diagnostic = "target not met at maximum precision";
  }
  r.kernel_runs = probe.runs() - runs0;
  r.wall_time_s = seconds_since(t0);
  return r;
}

TunedResult fptuning_baseline(const ErrorEvaluator& eval, double error_target,
                              const DomainBox& domains) {
  ErrorProbe probe(eval);
  return fptuning_baseline(probe, error_target, domains);
}

BruteForceResult brute_force_optimum(ErrorProbe& probe, double error_target,
                                     const DomainBox& domains, double cap) {
  check_arity(probe.arity(), domains);
  if (domains.cardinality() > cap) {
    throw Error(ErrorCode::kCapExceeded,
                "domain product " + text::format_double(domains.cardinality()) +
                    " exceeds cap " + text::format_double(cap));
  }
  const long runs0 = probe.runs();
  BruteForceResult out;
  PrecisionConfig c = domains.lower_corner();
  const std::size_t n = c.size();
  while (true) {
    if (satisfies_dependencies(c, probe.edges())) {
      const long z = c.total_bits();
      if (!out.solution || z < out.solution->objective) {
        if (probe.error(c) <= error_target) out.solution = Solution{c, z, 0.0, 0};
      }
    }
    // Odometer increment, last variable fastest, so configs come out in
    // lexicographic order.
    std::size_t k = n;
    while (k > 0) {
      --k;
      if (c.bits[k] < domains.ranges[k].hi) {
        ++c.bits[k];
        break;
      }
      c.bits[k] = domains.ranges[k].lo;
      if (k == 0) {
        out.kernel_runs = probe.runs() - runs0;
        return out;
      }
    }
    if (n == 0) break;
  }
  out.kernel_runs = probe.runs() - runs0;
  return out;
}

BruteForceResult brute_force_optimum(const ErrorEvaluator& eval,
                                     double error_target,
                                     const DomainBox& domains, double cap) {
  ErrorProbe probe(eval);
  return brute_force_optimum(probe, error_target, domains, cap);
}

nlohmann::json to_json(const TunedResult& r, double error_target) {
  nlohmann::json j;
  j["error_target"] = error_target;
  j["config"] = r.solution.config.bits;
  j["total_bits"] = r.solution.config.total_bits();
  j["predicted_logerr"] = r.solution.predicted_logerr;
  j["classifier_c"] = r.solution.classifier_c;
  if (std::isfinite(r.actual_error)) {
    j["actual_error"] = r.actual_error;
  } else {
    j["actual_error"] = nullptr;
  }
  j["feasible"] = r.feasible;
  j["status"] = to_string(r.status);
  j["refinement_iterations"] = r.refinement_iterations;
  j["refine_passes"] = r.refine_passes;
  j["samples_added"] = r.samples_added;
  j["kernel_runs"] = r.kernel_runs;
  j["wall_time_s"] = r.wall_time_s;
  if (!r.diagnostic.empty()) j["diagnostic"] = r.diagnostic;
  return j;
}

}  // namespace fptune
