#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "fptune/error.hpp"
#include "fptune/learn.hpp"

namespace fptune {

namespace {

// Keeps tiny networks from starting with units that are dead everywhere.
constexpr double kHiddenBiasInit = 0.1;

}  // namespace

double MlpModel::normalize(int dim, double bits) const {
  const double span = norm_hi[dim] - norm_lo[dim];
  return (bits - norm_lo[dim]) / (span > 0.0 ? span : 1.0);
}

MlpModel make_mlp(int n, int nbit_min, int nbit_max) {
  if (n < 1) throw Error(ErrorCode::kInvalidArgument, "mlp needs >= 1 input");
  MlpModel m;
  m.layer_sizes = {n, 2 * n, 2 * n, n, 1};
  m.norm_lo.assign(n, nbit_min);
  m.norm_hi.assign(n, nbit_max);
  for (std::size_t l = 0; l + 1 < m.layer_sizes.size(); ++l) {
    DenseLayer layer;
    layer.inputs = m.layer_sizes[l];
    layer.outputs = m.layer_sizes[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.inputs) * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    layer.relu = l + 2 < m.layer_sizes.size();
    m.layers.push_back(std::move(layer));
  }
  return m;
}

namespace {

// Accumulation order (bias first, then inputs in index order) is shared with
// the interval propagation in embed.cpp.
void dense_forward(const DenseLayer& layer, const double* in, double* pre,
                   double* out) {
  for (int j = 0; j < layer.outputs; ++j) {
    double acc = layer.bias[j];
    const double* w = &layer.weights[static_cast<std::size_t>(j) * layer.inputs];
    for (int i = 0; i < layer.inputs; ++i) acc += w[i] * in[i];
    if (pre) pre[j] = acc;
    out[j] = layer.relu ? std::max(acc, 0.0) : acc;
  }
}

void check_width(const MlpModel& model, std::size_t width) {
  if (width != static_cast<std::size_t>(model.input_width())) {
    throw Error(ErrorCode::kWidthMismatch,
                "regressor expects " + std::to_string(model.input_width()) +
                    " inputs, got " + std::to_string(width));
  }
}

struct AdamSlot {
  std::vector<double> m, v;
  explicit AdamSlot(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

}  // namespace

double predict_logerr(const MlpModel& model, std::span<const int> bits) {
  check_width(model, bits.size());
  std::vector<double> cur(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    cur[i] = model.normalize(static_cast<int>(i), bits[i]);
  }
  std::vector<double> next;
  for (const auto& layer : model.layers) {
    next.assign(layer.outputs, 0.0);
    dense_forward(layer, cur.data(), nullptr, next.data());
    cur.swap(next);
  }
  return cur[0];
}

double predict_logerr(const MlpModel& model, const PrecisionConfig& config) {
  return predict_logerr(model, std::span<const int>(config.bits));
}

std::vector<const Sample*> regressor_training_set(const Dataset& ds,
                                                  double class_threshold) {
  std::vector<const Sample*> out;
  for (const auto& s : ds.samples) {
    if (error_class(s.error, class_threshold) == 0) out.push_back(&s);
  }
  return out;
}

MlpModel train_regressor(const Dataset& ds, const TrainConfig& cfg) {
  const auto train = regressor_training_set(ds, cfg.class_threshold);
  if (train.size() < 2) {
    throw Error(ErrorCode::kInsufficientData,
                "regressor needs >= 2 class-0 samples, dataset has " +
                    std::to_string(train.size()));
  }
  if (cfg.epochs < 0 || cfg.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "epochs >= 0 and batch_size >= 1 required");
  }
  const int n = static_cast<int>(train.front()->config.size());
  for (const Sample* s : train) {
    if (s->config.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::kWidthMismatch, "dataset configs differ in arity");
    }
  }

  MlpModel model = make_mlp(n, ds.nbit_min, ds.nbit_max);
  std::mt19937_64 rng(cfg.seed);

  // He-uniform hidden layers; the output layer starts at zero so the initial
  // prediction is the target mean.
  for (auto& layer : model.layers) {
    if (!layer.relu) continue;
    const double limit = std::sqrt(6.0 / layer.inputs);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : layer.weights) w = dist(rng);
    layer.bias.assign(layer.outputs, kHiddenBiasInit);
  }

  const std::size_t count = train.size();
  std::vector<double> inputs(count * n), targets(count);
  double mean = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    for (int d = 0; d < n; ++d) {
      inputs[k * n + d] = model.normalize(d, train[k]->config[d]);
    }
    mean += train[k]->log_err;
  }
  mean /= static_cast<double>(count);
  double var = 0.0;
  for (std::size_t k = 0; k < count; ++k) {
    var += (train[k]->log_err - mean) * (train[k]->log_err - mean);
  }
  double scale = std::sqrt(var / static_cast<double>(count));
  if (!(scale > 1e-12)) scale = 1.0;
  for (std::size_t k = 0; k < count; ++k) {
    targets[k] = (train[k]->log_err - mean) / scale;
  }

  const std::size_t n_layers = model.layers.size();
  std::vector<AdamSlot> adam_w, adam_b;
  std::vector<std::vector<double>> grad_w(n_layers), grad_b(n_layers);
  std::vector<std::vector<double>> pre(n_layers), act(n_layers + 1), delta(n_layers);
  act[0].resize(n);
  for (std::size_t l = 0; l < n_layers; ++l) {
    const auto& layer = model.layers[l];
    adam_w.emplace_back(layer.weights.size());
    adam_b.emplace_back(layer.bias.size());
    grad_w[l].resize(layer.weights.size());
    grad_b[l].resize(layer.bias.size());
    pre[l].resize(layer.outputs);
    act[l + 1].resize(layer.outputs);
    delta[l].resize(layer.outputs);
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), 0);
  double beta1_pow = 1.0, beta2_pow = 1.0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < count; start += cfg.batch_size) {
      const std::size_t end = std::min(count, start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      for (std::size_t l = 0; l < n_layers; ++l) {
        std::fill(grad_w[l].begin(), grad_w[l].end(), 0.0);
        std::fill(grad_b[l].begin(), grad_b[l].end(), 0.0);
      }

      for (std::size_t b = start; b < end; ++b) {
        const std::size_t k = order[b];
        std::copy_n(&inputs[k * n], n, act[0].begin());
        for (std::size_t l = 0; l < n_layers; ++l) {
          dense_forward(model.layers[l], act[l].data(), pre[l].data(),
                        act[l + 1].data());
        }
        delta[n_layers - 1][0] = 2.0 * (act[n_layers][0] - targets[k]) * inv_batch;
        for (std::size_t l = n_layers; l-- > 0;) {
          const auto& layer = model.layers[l];
          for (int j = 0; j < layer.outputs; ++j) {
            const double dj = delta[l][j];
            grad_b[l][j] += dj;
            double* gw = &grad_w[l][static_cast<std::size_t>(j) * layer.inputs];
            for (int i = 0; i < layer.inputs; ++i) gw[i] += dj * act[l][i];
          }
          if (l == 0) break;
          auto& prev = delta[l - 1];
          std::fill(prev.begin(), prev.end(), 0.0);
          for (int j = 0; j < layer.outputs; ++j) {
            const double dj = delta[l][j];
            const double* w = &layer.weights[static_cast<std::size_t>(j) * layer.inputs];
            for (int i = 0; i < layer.inputs; ++i) prev[i] += w[i] * dj;
          }
          for (int i = 0; i < layer.inputs; ++i) {
            if (pre[l - 1][i] <= 0.0) prev[i] = 0.0;
          }
        }
      }

      beta1_pow *= cfg.beta1;
      beta2_pow *= cfg.beta2;
      const double lr_t =
          cfg.learning_rate * std::sqrt(1.0 - beta2_pow) / (1.0 - beta1_pow);
      const auto update = [&](std::vector<double>& param,
                              const std::vector<double>& grad, AdamSlot& st) {
        for (std::size_t i = 0; i < param.size(); ++i) {
          st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * grad[i];
          st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
          param[i] -= lr_t * st.m[i] / (std::sqrt(st.v[i]) + cfg.epsilon);
        }
      };
      for (std::size_t l = 0; l < n_layers; ++l) {
        update(model.layers[l].weights, grad_w[l], adam_w[l]);
        update(model.layers[l].bias, grad_b[l], adam_b[l]);
      }
    }
  }

  // Undo the target standardization inside the affine output layer.
  auto& out = model.layers.back();
  for (double& w : out.weights) w *= scale;
  out.bias[0] = out.bias[0] * scale + mean;
  return model;
}

}  // namespace fptune
