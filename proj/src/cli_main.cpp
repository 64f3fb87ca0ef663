#include <CLI11.hpp>

#include <functional>
#include <iostream>
#include <map>

#include "fptune/cli.hpp"
#include "fptune/error.hpp"

namespace fptune {

namespace {

struct Flag {
  const char* name;    // option spelling
  const char* key;     // config key it overrides
  const char* help;
};

constexpr Flag kFlags[] = {
    {"--benchmark", "benchmark", "benchmark name, comma list, or 'all'"},
    {"--input-shape", "input_shape", "input shape such as 1024 or 64x11"},
    {"--seed-input", "seed_input", "input-set seed"},
    {"--seed-sampling", "seed_sampling", "dataset sampling seed"},
    {"--seed-train", "seed_train", "model training seed"},
    {"--nbit-min", "nbit_min", "smallest mantissa width"},
    {"--nbit-max", "nbit_max", "largest mantissa width"},
    {"--dataset-size", "dataset_size", "number of sampled configurations"},
    {"--dataset", "dataset", "load this dataset CSV instead of sampling"},
    {"--epochs", "epochs", "regressor training epochs"},
    {"--batch-size", "batch_size", "regressor batch size"},
    {"--learning-rate", "learning_rate", "Adam step size"},
    {"--dt-max-depth", "dt_max_depth", "decision tree depth limit"},
    {"--budget", "budget", "refinement loop iteration budget"},
    {"--mode", "mode", "smart, smart_plus or baseline"},
    {"--out", "out", "output directory"},
    {"--sizes", "sizes", "ascending dataset sizes for the sweep"},
    {"--heldout-size", "heldout_size", "held-out set size for the sweep"},
    {"--n-inputs", "n_inputs", "number of input sets for transfer"},
    {"--formats", "formats", "hardware mantissa widths for snap-hw"},
    {"--result", "result", "tuning result JSON for snap-hw"},
    {"--holdout", "holdout", "held-out fraction for train metrics"},
    {"--cap", "cap", "largest domain product the oracle enumerates"},
    {"--threads", "threads", "dataset worker threads (0: hardware)"},
};

using Command = int (*)(const RunConfig&, std::ostream&);

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Mixed-precision tuning with learned error models"};
  app.require_subcommand(1);

  const std::map<std::string, std::pair<Command, std::string>> commands{
      {"dataset", {cmd_dataset, "sample configurations and record their errors"}},
      {"train", {cmd_train, "train the error regressor and classifier"}},
      {"tune", {cmd_tune, "tune each error target and write a summary"}},
      {"sweep", {cmd_sweep_dataset_size, "model quality against dataset size"}},
      {"transfer", {cmd_eval_transfer, "violation rates on unseen input sets"}},
      {"snap-hw", {cmd_snap_hw, "round a result up to hardware formats"}},
      {"oracle", {cmd_oracle, "exhaustive optimum over the domain"}},
  };

  std::string config_path;
  std::vector<std::string> targets;
  std::map<std::string, std::string> values;
  bool reproducible = false;
  bool quiet = false;
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, entry] : commands) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    sub->add_option("--config", config_path, "flat key = value run configuration");
    sub->add_option("--target", targets, "error target (repeatable)");
    for (const Flag& f : kFlags) sub->add_option(f.name, values[f.key], f.help);
    sub->add_flag("--reproducible", reproducible, "write zero wall-clock times");
    sub->add_flag("--quiet", quiet, "suppress progress output");
    subs[name] = sub;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) apply_config_file(cfg, config_path);
    for (const auto& [name, sub] : subs) {
      if (!sub->parsed()) continue;
      for (const Flag& f : kFlags) {
        if (sub->count(f.name) > 0) apply_config_value(cfg, f.key, values[f.key]);
      }
      if (!targets.empty()) {
        cfg.targets.clear();
        for (const auto& t : targets) {
          RunConfig one;
          apply_config_value(one, "targets", t);
          cfg.targets.insert(cfg.targets.end(), one.targets.begin(), one.targets.end());
        }
      }
      if (reproducible) cfg.reproducible = true;
      if (quiet) cfg.quiet = true;
      validate(cfg);
      return commands.at(name).first(cfg, std::cout);
    }
  } catch (const Error& e) {
    std::cerr << "fptune: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "fptune: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace fptune
