#pragma once

// The two empirical error models:
//  - an MLP regressor predicting L = -log10(E) from a precision config,
//  - a CART decision tree flagging large-error configs (E > threshold).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "fptune/config.hpp"
#include "fptune/dataset.hpp"

namespace fptune {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 32;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
  int dt_max_depth = 20;
  int dt_min_samples_split = 2;
  double class_threshold = kClassThreshold;
};

// Fully connected layer, weights stored row major (out x in).
struct DenseLayer {
  int inputs = 0;
  int outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;
  bool relu = true;

  double weight(int row, int col) const { return weights[row * inputs + col]; }
  bool operator==(const DenseLayer&) const = default;
};

struct MlpModel {
  std::vector<int> layer_sizes;  // n, 2n, 2n, n, 1
  std::vector<double> norm_lo;   // per input dimension, maps to 0
  std::vector<double> norm_hi;   // per input dimension, maps to 1
  std::vector<DenseLayer> layers;

  int input_width() const { return layer_sizes.empty() ? 0 : layer_sizes.front(); }
  double normalize(int dim, double bits) const;

  bool operator==(const MlpModel&) const = default;
};

// The regressor topology for `n` inputs with all parameters zero.
MlpModel make_mlp(int n, int nbit_min, int nbit_max);

// Throws Error(kWidthMismatch) on arity mismatch.
double predict_logerr(const MlpModel& model, const PrecisionConfig& config);
double predict_logerr(const MlpModel& model, std::span<const int> bits);

// Fits on class-0 samples only (error <= cfg.class_threshold), minimizing
// mean squared error on log_err with Adam. Throws Error(kInsufficientData)
// with fewer than two usable samples.
MlpModel train_regressor(const Dataset& ds, const TrainConfig& cfg);

// Samples that train_regressor actually fits.
std::vector<const Sample*> regressor_training_set(const Dataset& ds,
                                                  double class_threshold);

// Flat binary tree; node 0 is the root. Internal nodes send x[feature] <=
// threshold to `left`.
struct DtNode {
  int feature = -1;
  int threshold = 0;
  int left = -1;
  int right = -1;
  int label = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const DtNode&) const = default;
};

struct DtModel {
  int n_features = 0;
  int max_depth = 0;
  std::vector<DtNode> nodes;

  int depth() const;
  bool operator==(const DtModel&) const = default;
};

int classify(const DtModel& model, const PrecisionConfig& config);
int classify(const DtModel& model, std::span<const int> bits);

// Greedy CART induction with Gini impurity. Ties between candidate splits go
// to the lowest feature index, then the lowest threshold.
DtModel train_classifier(const Dataset& ds, const TrainConfig& cfg);

struct ModelMetrics {
  double rmse = 0.0;   // log_err units, over class-0 held-out samples
  double nrmse = 0.0;  // rmse / range of those targets
  double accuracy = 0.0;
  int true_pos = 0;
  int true_neg = 0;
  int false_pos = 0;
  int false_neg = 0;
  std::size_t regression_samples = 0;
  std::size_t classification_samples = 0;
};

ModelMetrics eval_models(const MlpModel& reg, const DtModel& cls,
                         const Dataset& heldout);

// Seeded shuffle split; the first part holds round(train_fraction * n).
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double train_fraction,
                                          std::uint64_t seed);

nlohmann::json to_json(const MlpModel& model);
nlohmann::json to_json(const DtModel& model);
MlpModel mlp_from_json(const nlohmann::json& j);
DtModel dt_from_json(const nlohmann::json& j);

void save_model(const MlpModel& model, const std::filesystem::path& path);
void save_model(const DtModel& model, const std::filesystem::path& path);
MlpModel load_regressor(const std::filesystem::path& path);
DtModel load_classifier(const std::filesystem::path& path);

}  // namespace fptune
