#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "fptune/error.hpp"
#include "fptune/learn.hpp"

namespace fptune {

ModelMetrics eval_models(const MlpModel& reg, const DtModel& cls,
                         const Dataset& heldout) {
  if (heldout.samples.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "held-out dataset is empty");
  }
  ModelMetrics m;
  double sq = 0.0;
  double lo = 0.0, hi = 0.0;
  for (const auto& s : heldout.samples) {
    const int predicted = classify(cls, s.config);
    if (predicted == 1 && s.class_label == 1) ++m.true_pos;
    if (predicted == 0 && s.class_label == 0) ++m.true_neg;
    if (predicted == 1 && s.class_label == 0) ++m.false_pos;
    if (predicted == 0 && s.class_label == 1) ++m.false_neg;
    if (s.class_label != 0) continue;
    const double diff = predict_logerr(reg, s.config) - s.log_err;
    sq += diff * diff;
    if (m.regression_samples == 0) {
      lo = hi = s.log_err;
    } else {
      lo = std::min(lo, s.log_err);
      hi = std::max(hi, s.log_err);
    }
    ++m.regression_samples;
  }
  m.classification_samples = heldout.samples.size();
  m.accuracy = static_cast<double>(m.true_pos + m.true_neg) /
               static_cast<double>(m.classification_samples);
  if (m.regression_samples > 0) {
    m.rmse = std::sqrt(sq / static_cast<double>(m.regression_samples));
    m.nrmse = hi > lo ? m.rmse / (hi - lo) : m.rmse;
  }
  return m;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds,
                                          double train_fraction,
                                          std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "train_fraction must be in [0,1]");
  }
  std::vector<std::size_t> idx(ds.samples.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(idx.size())));
  Dataset train = ds, test = ds;
  train.samples.clear();
  test.samples.clear();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    (k < n_train ? train : test).samples.push_back(ds.samples[idx[k]]);
  }
  return {std::move(train), std::move(test)};
}

nlohmann::json to_json(const MlpModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  nlohmann::json activations = nlohmann::json::array();
  for (const auto& l : model.layers) {
    layers.push_back({{"inputs", l.inputs},
                      {"outputs", l.outputs},
                      {"weights", l.weights},
                      {"bias", l.bias}});
    activations.push_back(l.relu ? "relu" : "linear");
  }
  return {{"type", "mlp"},
          {"layer_sizes", model.layer_sizes},
          {"norm_lo", model.norm_lo},
          {"norm_hi", model.norm_hi},
          {"activations", activations},
          {"layers", layers}};
}

namespace {

nlohmann::json node_to_json(const DtModel& m, int index) {
  const DtNode& n = m.nodes[index];
  if (n.is_leaf()) return {{"class", n.label}};
  return {{"feature", n.feature},
          {"threshold", n.threshold},
          {"class", n.label},
          {"left", node_to_json(m, n.left)},
          {"right", node_to_json(m, n.right)}};
}

int node_from_json(const nlohmann::json& j, DtModel& m) {
  const int index = static_cast<int>(m.nodes.size());
  m.nodes.push_back(DtNode{});
  m.nodes[index].label = j.at("class").get<int>();
  if (!j.contains("feature")) return index;
  const int feature = j.at("feature").get<int>();
  const int threshold = j.at("threshold").get<int>();
  if (feature < 0 || feature >= m.n_features) {
    throw Error(ErrorCode::kParse, "tree node feature out of range");
  }
  const int l = node_from_json(j.at("left"), m);
  const int r = node_from_json(j.at("right"), m);
  DtNode& n = m.nodes[index];
  n.feature = feature;
  n.threshold = threshold;
  n.left = l;
  n.right = r;
  return index;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
}

void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

}  // namespace

nlohmann::json to_json(const DtModel& model) {
  return {{"type", "decision_tree"},
          {"n_features", model.n_features},
          {"max_depth", model.max_depth},
          {"root", node_to_json(model, 0)}};
}

MlpModel mlp_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type") != "mlp") throw Error(ErrorCode::kParse, "not an mlp model");
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
    m.norm_lo = j.at("norm_lo").get<std::vector<double>>();
    m.norm_hi = j.at("norm_hi").get<std::vector<double>>();
    const auto& acts = j.at("activations");
    const auto& layers = j.at("layers");
    if (layers.size() + 1 != m.layer_sizes.size() || acts.size() != layers.size()) {
      throw Error(ErrorCode::kParse, "layer count mismatch");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      DenseLayer d;
      d.inputs = layers[l].at("inputs").get<int>();
      d.outputs = layers[l].at("outputs").get<int>();
      d.weights = layers[l].at("weights").get<std::vector<double>>();
      d.bias = layers[l].at("bias").get<std::vector<double>>();
      d.relu = acts[l] == "relu";
      if (d.inputs != m.layer_sizes[l] || d.outputs != m.layer_sizes[l + 1] ||
          d.weights.size() != static_cast<std::size_t>(d.inputs) * d.outputs ||
          d.bias.size() != static_cast<std::size_t>(d.outputs)) {
        throw Error(ErrorCode::kParse, "layer " + std::to_string(l) + " dimensions do not chain");
      }
      m.layers.push_back(std::move(d));
    }
    if (m.norm_lo.size() != static_cast<std::size_t>(m.input_width()) ||
        m.norm_hi.size() != m.norm_lo.size()) {
      throw Error(ErrorCode::kParse, "normalization width mismatch");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("regressor json: ") + e.what());
  }
}

DtModel dt_from_json(const nlohmann::json& j) {
  try {
    if (j.at("type") != "decision_tree") {
      throw Error(ErrorCode::kParse, "not a decision tree model");
    }
    DtModel m;
    m.n_features = j.at("n_features").get<int>();
    m.max_depth = j.at("max_depth").get<int>();
    node_from_json(j.at("root"), m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("classifier json: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_json(to_json(model), path);
}
void save_model(const DtModel& model, const std::filesystem::path& path) {
  write_json(to_json(model), path);
}
MlpModel load_regressor(const std::filesystem::path& path) {
  return mlp_from_json(read_json(path));
}
DtModel load_classifier(const std::filesystem::path& path) {
  return dt_from_json(read_json(path));
}

}  // namespace fptune
