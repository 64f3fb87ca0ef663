#include <algorithm>
#include <vector>

#include "fptune/error.hpp"
#include "fptune/learn.hpp"

namespace fptune {

namespace {

struct Row {
  const std::vector<int>* x;
  int y;
};

// Split quality as an exact fraction: sum over children of
// (count0^2 + count1^2) / size, which is larger for lower weighted Gini.
struct Score {
  __int128 num = -1;
  __int128 den = 1;

  bool better_than(const Score& o) const { return num * o.den > o.num * den; }
};

Score split_score(long a0, long a1, long b0, long b1) {
  const __int128 nl = a0 + a1;
  const __int128 nr = b0 + b1;
  return {(__int128(a0) * a0 + __int128(a1) * a1) * nr +
              (__int128(b0) * b0 + __int128(b1) * b1) * nl,
          nl * nr};
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainConfig& cfg, int n_features, DtModel& model)
      : cfg_(cfg), n_features_(n_features), model_(model) {}

  int build(std::vector<Row>& rows, int depth) {
    long c0 = 0, c1 = 0;
    for (const auto& r : rows) (r.y ? c1 : c0)++;
    const int index = static_cast<int>(model_.nodes.size());
    model_.nodes.push_back(DtNode{});
    model_.nodes[index].label = c1 >= c0 ? 1 : 0;

    if (depth >= cfg_.dt_max_depth || c0 == 0 || c1 == 0 ||
        static_cast<long>(rows.size()) < cfg_.dt_min_samples_split) {
      return index;
    }

    int best_feature = -1;
    int best_threshold = 0;
    Score best;
    std::vector<std::pair<int, int>> column(rows.size());
    for (int f = 0; f < n_features_; ++f) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        column[k] = {(*rows[k].x)[f], rows[k].y};
      }
      std::sort(column.begin(), column.end());
      long a0 = 0, a1 = 0;
      for (std::size_t k = 0; k + 1 < column.size(); ++k) {
        (column[k].second ? a1 : a0)++;
        if (column[k].first == column[k + 1].first) continue;
        const Score s = split_score(a0, a1, c0 - a0, c1 - a1);
        if (best_feature < 0 || s.better_than(best)) {
          best = s;
          best_feature = f;
          best_threshold = column[k].first;
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<Row> left, right;
    for (const auto& r : rows) {
      ((*r.x)[best_feature] <= best_threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = build(left, depth + 1);
    const int rgt = build(right, depth + 1);
    DtNode& node = model_.nodes[index];
    node.feature = best_feature;
    node.threshold = best_threshold;
    node.left = l;
    node.right = rgt;
    return index;
  }

 private:
  const TrainConfig& cfg_;
  int n_features_;
  DtModel& model_;
};

int leaf_depth(const DtModel& m, int node) {
  const DtNode& n = m.nodes[node];
  if (n.is_leaf()) return 0;
  return 1 + std::max(leaf_depth(m, n.left), leaf_depth(m, n.right));
}

}  // namespace

int DtModel::depth() const { return nodes.empty() ? 0 : leaf_depth(*this, 0); }

int classify(const DtModel& model, std::span<const int> bits) {
  if (bits.size() != static_cast<std::size_t>(model.n_features)) {
    throw Error(ErrorCode::kWidthMismatch,
                "classifier expects " + std::to_string(model.n_features) +
                    " inputs, got " + std::to_string(bits.size()));
  }
  int node = 0;
  while (!model.nodes[node].is_leaf()) {
    const DtNode& n = model.nodes[node];
    node = bits[n.feature] <= n.threshold ? n.left : n.right;
  }
  return model.nodes[node].label;
}

int classify(const DtModel& model, const PrecisionConfig& config) {
  return classify(model, std::span<const int>(config.bits));
}

DtModel train_classifier(const Dataset& ds, const TrainConfig& cfg) {
  if (ds.samples.empty()) {
    throw Error(ErrorCode::kEmptyDataset, "classifier needs a nonempty dataset");
  }
  const int n = static_cast<int>(ds.samples.front().config.size());
  std::vector<Row> rows;
  rows.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    if (s.config.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::kWidthMismatch, "dataset configs differ in arity");
    }
    rows.push_back({&s.config.bits, error_class(s.error, cfg.class_threshold)});
  }
  DtModel model;
  model.n_features = n;
  model.max_depth = cfg.dt_max_depth;
  TreeBuilder(cfg, n, model).build(rows, 0);
  return model;
}

}  // namespace fptune
