#pragma once

// Solver-facing views of the trained models: sound output bounds of the
// regressor over a box of integer precision domains, and the classification
// status of a whole box under the decision tree.

#include <cstddef>
#include <string>
#include <vector>

#include "fptune/config.hpp"
#include "fptune/learn.hpp"

namespace fptune {

struct IntRange {
  int lo = 0;
  int hi = 0;

  int width() const { return hi - lo + 1; }
  bool empty() const { return lo > hi; }
  bool operator==(const IntRange&) const = default;
};

struct DomainBox {
  std::vector<IntRange> ranges;

  static DomainBox uniform(std::size_t n, int lo, int hi);
  static DomainBox singleton(const PrecisionConfig& config);

  std::size_t size() const { return ranges.size(); }
  bool is_singleton() const;
  bool contains(const PrecisionConfig& config) const;
  bool contains(const DomainBox& inner) const;
  long lower_objective() const;  // sum of lower bounds
  double cardinality() const;    // number of integer points
  PrecisionConfig lower_corner() const;

  bool operator==(const DomainBox&) const = default;
};

std::string to_string(const DomainBox& box);

struct OutputInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// Interval propagation through normalization, each affine layer (weights
// split by sign) and ReLU. Every config inside `box` predicts a value inside
// the result; a singleton box reproduces predict_logerr exactly.
OutputInterval nn_output_bounds(const MlpModel& model, const DomainBox& box);

enum class BoxStatus { kAllZero, kAllOne, kMixed };

const char* to_string(BoxStatus status);

BoxStatus dt_box_status(const DtModel& model, const DomainBox& box);

}  // namespace fptune
