#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "fptune/cli.hpp"
#include "fptune/dataset.hpp"
#include "fptune/error.hpp"
#include "fptune/solve.hpp"
#include "text_util.hpp"

namespace fptune {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Held-out sets for the size sweep come from an independent LHS stream.
constexpr std::uint64_t kHeldoutSeedMix = 0x9E3779B97F4A7C15ULL;

struct Logger {
  std::ostream& os;
  bool quiet;

  template <typename... Args>
  void operator()(const Args&... args) const {
    if (quiet) return;
    (os << ... << args) << "\n";
  }
};

// Writes through a temporary file so readers never see partial output.
void write_atomic(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out << text;
    if (!out) throw Error(ErrorCode::kIo, "write failed: " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string fmt(double x) { return text::format_double(x); }

std::string join_bits(const std::vector<int>& bits, char sep) {
  std::string out;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(bits[i]);
  }
  return out;
}

std::string seed_columns(const RunConfig& cfg) {
  return std::to_string(cfg.seed_input) + "," + std::to_string(cfg.seed_sampling) +
         "," + std::to_string(cfg.seed_train);
}

json run_metadata(const RunConfig& cfg, const BenchmarkDescriptor& bench,
                  const InputSet& input) {
  return {{"benchmark", bench.name},
          {"input_shape", to_string(input.shape)},
          {"seed_input", cfg.seed_input},
          {"seed_sampling", cfg.seed_sampling},
          {"seed_train", cfg.seed_train},
          {"nbit_min", cfg.nbit_min},
          {"nbit_max", cfg.nbit_max},
          {"dataset_size", cfg.dataset_size},
          {"budget", cfg.budget}};
}

InputSet make_input(const RunConfig& cfg, const BenchmarkDescriptor& bench,
                    std::uint64_t seed) {
  return gen_input_set(bench, cfg.input_shape.value_or(bench.default_input_shape),
                       seed);
}

TrainConfig train_config(const RunConfig& cfg) {
  TrainConfig t = cfg.train;
  t.seed = cfg.seed_train;
  return t;
}

Dataset obtain_dataset(const RunConfig& cfg, const BenchmarkDescriptor& bench,
                       const InputSet& input, const Logger& log) {
  if (cfg.dataset) {
    Dataset ds = load_dataset(*cfg.dataset);
    if (ds.benchmark != bench.name) {
      throw Error(ErrorCode::kInvalidArgument,
                  "dataset: " + cfg.dataset->string() + " holds " + ds.benchmark +
                      ", not " + bench.name);
    }
    log("loaded ", ds.samples.size(), " samples from ", cfg.dataset->string());
    return ds;
  }
  log(bench.name, ": building ", cfg.dataset_size, "-sample dataset");
  return build_dataset(bench, input, cfg.dataset_size, cfg.seed_sampling,
                       cfg.nbit_min, cfg.nbit_max, cfg.threads);
}

std::string target_tag(double t) { return fmt(t); }

}  // namespace

int cmd_dataset(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    const InputSet input = make_input(cfg, bench, cfg.seed_input);
    Dataset ds = build_dataset(bench, input, cfg.dataset_size, cfg.seed_sampling,
                               cfg.nbit_min, cfg.nbit_max, cfg.threads);
    fs::create_directories(cfg.out);
    const fs::path csv = cfg.out / (name + "_dataset.csv");
    save_dataset(ds, csv);
    save_input_set(input, cfg.out / (name + "_input.txt"));
    int class1 = 0;
    for (const auto& s : ds.samples) class1 += s.class_label;
    log(name, ": ", ds.samples.size(), " samples, ", class1, " with large error -> ",
        csv.string());
  }
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    const InputSet input = make_input(cfg, bench, cfg.seed_input);
    Dataset ds = obtain_dataset(cfg, bench, input, log);
    const TrainConfig tcfg = train_config(cfg);
    fs::create_directories(cfg.out);
    if (cfg.holdout > 0.0) {
      auto [train, test] = split_dataset(ds, 1.0 - cfg.holdout, cfg.seed_train);
      ds = std::move(train);
      const MlpModel reg = train_regressor(ds, tcfg);
      const DtModel cls = train_classifier(ds, tcfg);
      const ModelMetrics m = eval_models(reg, cls, test);
      json metrics = {{"benchmark", name},
                      {"rmse", m.rmse},
                      {"nrmse", m.nrmse},
                      {"accuracy", m.accuracy},
                      {"true_pos", m.true_pos},
                      {"true_neg", m.true_neg},
                      {"false_pos", m.false_pos},
                      {"false_neg", m.false_neg},
                      {"regression_samples", m.regression_samples},
                      {"classification_samples", m.classification_samples},
                      {"seed_sampling", cfg.seed_sampling},
                      {"seed_train", cfg.seed_train}};
      write_atomic(cfg.out / (name + "_metrics.json"), metrics.dump(1) + "\n");
      save_model(reg, cfg.out / (name + "_regressor.json"));
      save_model(cls, cfg.out / (name + "_classifier.json"));
      log(name, ": rmse ", m.rmse, " nrmse ", m.nrmse, " accuracy ", m.accuracy);
    } else {
      save_model(train_regressor(ds, tcfg), cfg.out / (name + "_regressor.json"));
      save_model(train_classifier(ds, tcfg), cfg.out / (name + "_classifier.json"));
      log(name, ": models written to ", cfg.out.string());
    }
  }
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  std::ostringstream summary;
  summary << "target,method,total_bits,actual_error,feasible,iterations,kernel_runs,"
             "wall_time_s,benchmark,seed_input,seed_sampling,seed_train\n";
  bool all_feasible = true;
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    const InputSet input = make_input(cfg, bench, cfg.seed_input);
    const ErrorEvaluator eval(bench, input);
    const DomainBox domains = DomainBox::uniform(bench.n_var, cfg.nbit_min, cfg.nbit_max);
    std::optional<Dataset> ds;
    if (cfg.mode != "baseline") ds = obtain_dataset(cfg, bench, input, log);

    for (double target : cfg.targets) {
      TunedResult r;
      json extra = json::object();
      if (cfg.mode == "baseline") {
        r = fptuning_baseline(eval, target, domains);
      } else {
        SmartTuneOptions opts;
        opts.budget = cfg.budget;
        r = smart_tune(eval, *ds, target, domains, train_config(cfg), opts);
        if (cfg.mode == "smart_plus") {
          extra["initial_total_bits"] = r.solution.config.total_bits();
          extra["initial_feasible"] = r.feasible;
          r = plus_refine(eval, target, domains, r);
        }
      }
      if (cfg.reproducible) r.wall_time_s = 0.0;
      const int iterations =
          cfg.mode == "baseline" ? r.refine_passes : r.refinement_iterations;
      all_feasible = all_feasible && r.feasible;

      json j = run_metadata(cfg, bench, input);
      j["method"] = cfg.mode;
      j.update(to_json(r, target));
      j.update(extra);
      write_atomic(cfg.out / ("result_" + name + "_" + cfg.mode + "_" +
                              target_tag(target) + ".json"),
                   j.dump(1) + "\n");

      summary << fmt(target) << "," << cfg.mode << "," << r.solution.config.total_bits()
              << "," << fmt(r.actual_error) << "," << (r.feasible ? "true" : "false")
              << "," << iterations << "," << r.kernel_runs << "," << fmt(r.wall_time_s)
              << "," << name << "," << seed_columns(cfg) << "\n";
      log(name, " target ", fmt(target), " ", cfg.mode, ": ",
          r.feasible ? "feasible" : to_string(r.status), " bits ",
          r.solution.config.total_bits(), " error ", fmt(r.actual_error), " runs ",
          r.kernel_runs);
    }
  }
  write_atomic(cfg.out / ("summary_" + cfg.mode + ".csv"), summary.str());
  return all_feasible ? kExitOk : kExitInfeasible;
}

int cmd_sweep_dataset_size(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  std::ostringstream csv;
  csv << "size,benchmark,rmse,accuracy,nrmse,seed_input,seed_sampling,seed_train\n";
  const int largest = cfg.sizes.back();
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    const InputSet input = make_input(cfg, bench, cfg.seed_input);
    log(name, ": building ", largest, " + ", cfg.heldout_size, " samples");
    const Dataset master = build_dataset(bench, input, largest, cfg.seed_sampling,
                                         cfg.nbit_min, cfg.nbit_max, cfg.threads);
    const Dataset heldout =
        build_dataset(bench, input, cfg.heldout_size, cfg.seed_sampling ^ kHeldoutSeedMix,
                      cfg.nbit_min, cfg.nbit_max, cfg.threads);
    for (int size : cfg.sizes) {
      Dataset subset = master;
      subset.samples.resize(static_cast<std::size_t>(size));
      const TrainConfig tcfg = train_config(cfg);
      const ModelMetrics m = eval_models(train_regressor(subset, tcfg),
                                         train_classifier(subset, tcfg), heldout);
      csv << size << "," << name << "," << fmt(m.rmse) << "," << fmt(m.accuracy) << ","
          << fmt(m.nrmse) << "," << seed_columns(cfg) << "\n";
      log(name, " size ", size, ": rmse ", m.rmse, " accuracy ", m.accuracy);
    }
  }
  write_atomic(cfg.out / "sweep.csv", csv.str());
  return kExitOk;
}

int cmd_eval_transfer(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  if (cfg.n_inputs < 2) {
    throw Error(ErrorCode::kInvalidArgument, "n_inputs must be >= 2");
  }
  std::ostringstream csv;
  csv << "target,benchmark,smart_violation_pct,baseline_violation_pct,seed_input,"
         "seed_sampling,seed_train\n";
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    std::vector<InputSet> inputs;
    for (int k = 0; k < cfg.n_inputs; ++k) {
      inputs.push_back(make_input(cfg, bench, cfg.seed_input + static_cast<std::uint64_t>(k)));
    }
    const ErrorEvaluator eval0(bench, inputs[0]);
    std::vector<ErrorEvaluator> others;
    for (int k = 1; k < cfg.n_inputs; ++k) others.emplace_back(bench, inputs[k]);
    const DomainBox domains = DomainBox::uniform(bench.n_var, cfg.nbit_min, cfg.nbit_max);
    const Dataset ds = obtain_dataset(cfg, bench, inputs[0], log);

    // A method that produced no configuration counts as violating everywhere.
    auto violation_pct = [&](const TunedResult& r, double target) {
      if (r.solution.config.size() == 0) return 100.0;
      int bad = 0;
      for (const auto& ev : others) bad += ev.error(r.solution.config) > target;
      return 100.0 * bad / static_cast<double>(others.size());
    };
    for (double target : cfg.targets) {
      SmartTuneOptions opts;
      opts.budget = cfg.budget;
      const TunedResult smart =
          smart_tune(eval0, ds, target, domains, train_config(cfg), opts);
      const TunedResult base = fptuning_baseline(eval0, target, domains);
      const double ps = violation_pct(smart, target);
      const double pb = violation_pct(base, target);
      csv << fmt(target) << "," << name << "," << fmt(ps) << "," << fmt(pb) << ","
          << seed_columns(cfg) << "\n";
      log(name, " target ", fmt(target), ": smart ", ps, "% baseline ", pb, "%");
    }
  }
  write_atomic(cfg.out / "transfer.csv", csv.str());
  return kExitOk;
}

int cmd_snap_hw(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  if (!cfg.result) {
    throw Error(ErrorCode::kInvalidArgument, "result: a tuning result file is required");
  }
  std::ifstream in(*cfg.result);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + cfg.result->string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, cfg.result->string() + ": " + e.what());
  }
  std::vector<int> bits;
  std::string name, shape_text;
  std::uint64_t seed = 0;
  double target = 0.0;
  try {
    bits = j.at("config").get<std::vector<int>>();
    name = j.at("benchmark").get<std::string>();
    shape_text = j.at("input_shape").get<std::string>();
    seed = j.at("seed_input").get<std::uint64_t>();
    target = j.at("error_target").get<double>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, cfg.result->string() + ": " + e.what());
  }
  const auto& bench = get_benchmark(name);
  if (bits.size() != static_cast<std::size_t>(bench.n_var)) {
    throw Error(ErrorCode::kParse, cfg.result->string() + ": config has no solution");
  }
  const std::vector<int> mapped = snap_up(bits, cfg.formats);
  const PrecisionConfig config(mapped);
  const InputSet input = gen_input_set(bench, parse_shape(shape_text), seed);
  const double err = ErrorEvaluator(bench, input).error(config);
  const bool feasible = err <= target;

  json out = {{"benchmark", name},
              {"input_shape", shape_text},
              {"seed_input", seed},
              {"error_target", target},
              {"formats", cfg.formats},
              {"original_config", bits},
              {"original_total_bits", PrecisionConfig(bits).total_bits()},
              {"config", mapped},
              {"total_bits", config.total_bits()},
              {"feasible", feasible}};
  out["actual_error"] = std::isfinite(err) ? json(err) : json(nullptr);
  const fs::path dest = cfg.out / (cfg.result->stem().string() + "_snapped.json");
  write_atomic(dest, out.dump(1) + "\n");
  log(name, ": [", join_bits(bits, ','), "] -> [", join_bits(mapped, ','), "] error ",
      fmt(err), feasible ? " feasible" : " violates target", " -> ", dest.string());
  return feasible ? kExitOk : kExitInfeasible;
}

int cmd_oracle(const RunConfig& cfg, std::ostream& os) {
  const Logger log{os, cfg.quiet};
  std::ostringstream csv;
  csv << "target,benchmark,total_bits,config,actual_error,kernel_runs,seed_input\n";
  bool all_found = true;
  for (const auto& name : cfg.benchmarks) {
    const auto& bench = get_benchmark(name);
    const InputSet input = make_input(cfg, bench, cfg.seed_input);
    const ErrorEvaluator eval(bench, input);
    const DomainBox domains = DomainBox::uniform(bench.n_var, cfg.nbit_min, cfg.nbit_max);
    for (double target : cfg.targets) {
      const BruteForceResult r = brute_force_optimum(eval, target, domains, cfg.cap);
      if (!r.solution) {
        all_found = false;
        csv << fmt(target) << "," << name << ",,,," << r.kernel_runs << ","
            << cfg.seed_input << "\n";
        log(name, " target ", fmt(target), ": no feasible configuration");
        continue;
      }
      const double err = eval.error(r.solution->config);
      csv << fmt(target) << "," << name << "," << r.solution->objective << ","
          << join_bits(r.solution->config.bits, ' ') << "," << fmt(err) << ","
          << r.kernel_runs << "," << cfg.seed_input << "\n";
      log(name, " target ", fmt(target), ": optimum ", r.solution->objective, " bits [",
          join_bits(r.solution->config.bits, ','), "]");
    }
  }
  write_atomic(cfg.out / "oracle.csv", csv.str());
  return all_found ? kExitOk : kExitInfeasible;
}

}  // namespace fptune
