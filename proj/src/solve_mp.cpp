#include <cmath>
#include <limits>

#include "fptune/error.hpp"
#include "fptune/solve.hpp"

namespace fptune {

TuningProblem build_problem(const BenchmarkDescriptor& bench,
                            double error_target, const DomainBox& domains) {
  if (!(error_target > 0.0) || !std::isfinite(error_target)) {
    throw Error(ErrorCode::kNonpositiveTarget,
                "error target must be a positive finite number");
  }
  if (domains.size() != static_cast<std::size_t>(bench.n_var)) {
    throw Error(ErrorCode::kArityMismatch,
                bench.name + " has " + std::to_string(bench.n_var) +
                    " variables, domains give " + std::to_string(domains.size()));
  }
  for (const auto& r : domains.ranges) {
    if (r.empty() || r.lo < 1 || r.hi > kDefaultNbitMax) {
      throw Error(ErrorCode::kInvalidRange,
                  "bad domain [" + std::to_string(r.lo) + "," +
                      std::to_string(r.hi) + "]");
    }
  }
  TuningProblem p;
  p.benchmark = bench.name;
  p.n_var = bench.n_var;
  p.edges = bench.edges;
  p.error_target = error_target;
  p.l_target = -std::log10(error_target);
  p.domains = domains;
  return p;
}

bool propagate_dependencies(DomainBox& box,
                            const std::vector<DependencyEdge>& edges) {
  auto& r = box.ranges;
  bool changed = true;
  while (changed) {
    changed = false;
    auto raise_lo = [&](int v, int value) {
      if (value > r[v].lo) {
        r[v].lo = value;
        changed = true;
      }
    };
    auto lower_hi = [&](int v, int value) {
      if (value < r[v].hi) {
        r[v].hi = value;
        changed = true;
      }
    };
    for (const auto& e : edges) {
      const int d = e.destination;
      if (e.kind == EdgeKind::kAssignment) {
        for (int s : e.sources) {
          raise_lo(d, r[s].lo);
          lower_hi(s, r[d].hi);
        }
      } else {
        // d == min(sources): d below every source, and some source can
        // reach down to d.
        int min_lo = std::numeric_limits<int>::max();
        int min_hi = std::numeric_limits<int>::max();
        for (int s : e.sources) {
          min_lo = std::min(min_lo, r[s].lo);
          min_hi = std::min(min_hi, r[s].hi);
        }
        raise_lo(d, min_lo);
        lower_hi(d, min_hi);
        for (int s : e.sources) raise_lo(s, r[d].lo);
        int candidates = 0;
        int only = -1;
        for (int s : e.sources) {
          if (r[s].lo <= r[d].hi) {
            ++candidates;
            only = s;
          }
        }
        if (candidates == 0) return false;
        if (candidates == 1) lower_hi(only, r[d].hi);
      }
    }
    for (const auto& x : r) {
      if (x.empty()) return false;
    }
  }
  return true;
}

bool satisfies_dependencies(const PrecisionConfig& config,
                            const std::vector<DependencyEdge>& edges) {
  for (const auto& e : edges) {
    if (e.kind == EdgeKind::kAssignment) {
      for (int s : e.sources) {
        if (config[s] > config[e.destination]) return false;
      }
    } else {
      int m = std::numeric_limits<int>::max();
      for (int s : e.sources) m = std::min(m, config[s]);
      if (config[e.destination] != m) return false;
    }
  }
  return true;
}

PrecisionConfig repair_dependencies(PrecisionConfig config,
                                    const std::vector<DependencyEdge>& edges) {
  // Cast targets follow their sources down. Cycles through cast targets can
  // keep rotating values, so this phase is capped.
  for (std::size_t pass = 0; pass <= config.size(); ++pass) {
    bool changed = false;
    for (const auto& e : edges) {
      if (e.kind != EdgeKind::kCast) continue;
      int m = std::numeric_limits<int>::max();
      for (int s : e.sources) m = std::min(m, config[s]);
      if (config[e.destination] != m) {
        config[e.destination] = m;
        changed = true;
      }
    }
    if (!changed) break;
  }
  // Raise-only to a fixpoint: x_dst >= x_src, x_s >= x_t and x_t >= min(x_s).
  // Each rule is monotone, so this ends at the least consistent config above.
  bool changed = true;
  while (changed) {
    changed = false;
    auto raise = [&](int i, int v) {
      if (config[i] < v) {
        config[i] = v;
        changed = true;
      }
    };
    for (const auto& e : edges) {
      if (e.kind == EdgeKind::kAssignment) {
        for (int s : e.sources) raise(e.destination, config[s]);
      } else {
        int m = std::numeric_limits<int>::max();
        for (int s : e.sources) m = std::min(m, config[s]);
        raise(e.destination, m);
        for (int s : e.sources) raise(s, config[e.destination]);
      }
    }
  }
  return config;
}

namespace {

class BranchAndBound {
 public:
  BranchAndBound(const TuningProblem& p, const MlpModel& reg, const DtModel& cls,
                 const SolveOptions& options)
      : p_(p), reg_(reg), cls_(cls), options_(options) {}

  SolveResult run() {
    visit(p_.domains);
    return {best_, stats_};
  }

 private:
  bool accept(const PrecisionConfig& c, double& predicted) const {
    if (p_.nogood_cuts.count(c)) return false;
    predicted = predict_logerr(reg_, c);
    return predicted >= p_.l_target && classify(cls_, c) == 0;
  }

  void visit(DomainBox box) {
    if (options_.node_limit > 0 && stats_.nodes >= options_.node_limit) {
      stats_.complete = false;
      return;
    }
    ++stats_.nodes;
    if (!propagate_dependencies(box, p_.edges)) return;
    const long z = box.lower_objective();
    if (best_ && z >= best_->objective) return;

    // After propagation the lower corner satisfies every dependency and
    // attains the box minimum, so an accepted corner closes the box.
    PrecisionConfig corner = box.lower_corner();
    double predicted = 0.0;
    if (accept(corner, predicted)) {
      best_ = Solution{std::move(corner), z, predicted, 0};
      return;
    }
    if (box.is_singleton()) return;
    if (dt_box_status(cls_, box) == BoxStatus::kAllOne) return;
    if (nn_output_bounds(reg_, box).upper < p_.l_target - kBoundSlack) return;

    std::size_t var = 0;
    for (std::size_t i = 1; i < box.size(); ++i) {
      if (box.ranges[i].width() > box.ranges[var].width()) var = i;
    }
    const IntRange r = box.ranges[var];
    const int mid = r.lo + (r.width() - 1) / 2;
    DomainBox upper = box;
    box.ranges[var].hi = mid;
    upper.ranges[var].lo = mid + 1;
    visit(std::move(box));
    visit(std::move(upper));
  }

  const TuningProblem& p_;
  const MlpModel& reg_;
  const DtModel& cls_;
  const SolveOptions& options_;
  std::optional<Solution> best_;
  SolveStats stats_;
};

}  // namespace

SolveResult solve_mp(const TuningProblem& problem, const MlpModel& reg,
                     const DtModel& cls, const SolveOptions& options) {
  const auto n = static_cast<std::size_t>(problem.n_var);
  if (static_cast<std::size_t>(reg.input_width()) != n ||
      static_cast<std::size_t>(cls.n_features) != n || problem.domains.size() != n) {
    throw Error(ErrorCode::kArityMismatch,
                "problem has " + std::to_string(n) + " variables, regressor " +
                    std::to_string(reg.input_width()) + ", classifier " +
                    std::to_string(cls.n_features) + ", domains " +
                    std::to_string(problem.domains.size()));
  }
  return BranchAndBound(problem, reg, cls, options).run();
}

}  // namespace fptune
