#include "fptune/embed.hpp"

#include <algorithm>

#include "fptune/error.hpp"

namespace fptune {

DomainBox DomainBox::uniform(std::size_t n, int lo, int hi) {
  if (lo > hi) {
    throw Error(ErrorCode::kInvalidRange, "domain lo > hi: " + std::to_string(lo) +
                                              " > " + std::to_string(hi));
  }
  return DomainBox{std::vector<IntRange>(n, IntRange{lo, hi})};
}

DomainBox DomainBox::singleton(const PrecisionConfig& config) {
  DomainBox box;
  for (int b : config.bits) box.ranges.push_back({b, b});
  return box;
}

bool DomainBox::is_singleton() const {
  return std::all_of(ranges.begin(), ranges.end(),
                     [](const IntRange& r) { return r.lo == r.hi; });
}

bool DomainBox::contains(const PrecisionConfig& config) const {
  if (config.size() != ranges.size()) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (config[i] < ranges[i].lo || config[i] > ranges[i].hi) return false;
  }
  return true;
}

bool DomainBox::contains(const DomainBox& inner) const {
  if (inner.size() != size()) return false;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (inner.ranges[i].lo < ranges[i].lo || inner.ranges[i].hi > ranges[i].hi) {
      return false;
    }
  }
  return true;
}

long DomainBox::lower_objective() const {
  long z = 0;
  for (const auto& r : ranges) z += r.lo;
  return z;
}

double DomainBox::cardinality() const {
  double c = 1.0;
  for (const auto& r : ranges) c *= std::max(0, r.width());
  return c;
}

PrecisionConfig DomainBox::lower_corner() const {
  PrecisionConfig c;
  for (const auto& r : ranges) c.bits.push_back(r.lo);
  return c;
}

std::string to_string(const DomainBox& box) {
  std::string out;
  for (std::size_t i = 0; i < box.ranges.size(); ++i) {
    if (i) out += "x";
    out += "[" + std::to_string(box.ranges[i].lo) + "," +
           std::to_string(box.ranges[i].hi) + "]";
  }
  return out;
}

OutputInterval nn_output_bounds(const MlpModel& model, const DomainBox& box) {
  if (box.size() != static_cast<std::size_t>(model.input_width())) {
    throw Error(ErrorCode::kWidthMismatch,
                "box has " + std::to_string(box.size()) + " dimensions, model " +
                    std::to_string(model.input_width()));
  }
  std::vector<double> lo(box.size()), hi(box.size());
  for (std::size_t i = 0; i < box.size(); ++i) {
    lo[i] = model.normalize(static_cast<int>(i), box.ranges[i].lo);
    hi[i] = model.normalize(static_cast<int>(i), box.ranges[i].hi);
  }
  std::vector<double> next_lo, next_hi;
  for (const auto& layer : model.layers) {
    next_lo.assign(layer.outputs, 0.0);
    next_hi.assign(layer.outputs, 0.0);
    for (int j = 0; j < layer.outputs; ++j) {
      double l = layer.bias[j];
      double u = layer.bias[j];
      const double* w = &layer.weights[static_cast<std::size_t>(j) * layer.inputs];
      for (int i = 0; i < layer.inputs; ++i) {
        if (w[i] >= 0.0) {
          l += w[i] * lo[i];
          u += w[i] * hi[i];
        } else {
          l += w[i] * hi[i];
          u += w[i] * lo[i];
        }
      }
      if (layer.relu) {
        l = std::max(l, 0.0);
        u = std::max(u, 0.0);
      }
      next_lo[j] = l;
      next_hi[j] = u;
    }
    lo.swap(next_lo);
    hi.swap(next_hi);
  }
  return {lo[0], hi[0]};
}

const char* to_string(BoxStatus status) {
  switch (status) {
    case BoxStatus::kAllZero: return "AllZero";
    case BoxStatus::kAllOne: return "AllOne";
    case BoxStatus::kMixed: return "Mixed";
  }
  return "?";
}

namespace {

// Bit 0 set: some reachable leaf predicts 0; bit 1: some predicts 1. `box`
// is narrowed along the path so contradictory splits prune.
unsigned reachable_labels(const DtModel& m, int node, DomainBox& box) {
  const DtNode& n = m.nodes[node];
  if (n.is_leaf()) return n.label ? 2U : 1U;
  IntRange& r = box.ranges[n.feature];
  const IntRange saved = r;
  unsigned out = 0;
  if (saved.lo <= n.threshold) {
    r.hi = std::min(saved.hi, n.threshold);
    out |= reachable_labels(m, n.left, box);
    r = saved;
  }
  if (out == 3U) return out;
  if (saved.hi > n.threshold) {
    r.lo = std::max(saved.lo, n.threshold + 1);
    out |= reachable_labels(m, n.right, box);
    r = saved;
  }
  return out;
}

}  // namespace

BoxStatus dt_box_status(const DtModel& model, const DomainBox& box) {
  if (box.size() != static_cast<std::size_t>(model.n_features)) {
    throw Error(ErrorCode::kWidthMismatch,
                "box has " + std::to_string(box.size()) + " dimensions, tree " +
                    std::to_string(model.n_features));
  }
  DomainBox work = box;
  switch (reachable_labels(model, 0, work)) {
    case 1U: return BoxStatus::kAllZero;
    case 2U: return BoxStatus::kAllOne;
    default: return BoxStatus::kMixed;
  }
}

}  // namespace fptune
