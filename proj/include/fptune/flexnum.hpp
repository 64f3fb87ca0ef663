#pragma once

// Reduced-precision floating point emulated on top of binary64.
//
// A value "in format (m, e)" is a binary64 number that is exactly
// representable with m explicit fraction bits and an e-bit exponent field
// (IEEE-style bias, subnormals included). Arithmetic is performed in binary64
// and the result is rounded once to the destination format.

#include <cstdint>
#include <string>

namespace fptune {

struct FlexFormat {
  int mantissa_bits = 52;
  int exponent_bits = 11;

  static constexpr int kMinMantissa = 1;
  static constexpr int kMaxMantissa = 52;
  static constexpr int kMinExponent = 2;
  static constexpr int kMaxExponent = 11;

  // Throws fptune::Error when either width is out of range.
  static FlexFormat make(int mantissa_bits, int exponent_bits = 11);

  static constexpr FlexFormat binary64() { return {52, 11}; }

  int bias() const { return (1 << (exponent_bits - 1)) - 1; }
  int min_normal_exponent() const { return 1 - bias(); }
  int max_exponent() const { return bias(); }
  double max_finite() const;

  bool operator==(const FlexFormat&) const = default;
};

std::string to_string(const FlexFormat& fmt);

// Nearest value of `fmt` under round-to-nearest-even. Overflow saturates to
// +-inf, tiny values underflow gradually through the subnormals of `fmt`.
// NaN and infinities pass through unchanged.
double round_to_format(double x, const FlexFormat& fmt);

bool is_representable(double x, const FlexFormat& fmt);

enum class FlexOp { kAdd, kSub, kMul, kDiv };

// Computes `a op b` in binary64 and rounds the result to `result_fmt`.
// Operands are used as given.
double flex_op(FlexOp kind, double a, double b, const FlexFormat& result_fmt);

inline double flex_add(double a, double b, const FlexFormat& f) {
  return flex_op(FlexOp::kAdd, a, b, f);
}
inline double flex_sub(double a, double b, const FlexFormat& f) {
  return flex_op(FlexOp::kSub, a, b, f);
}
inline double flex_mul(double a, double b, const FlexFormat& f) {
  return flex_op(FlexOp::kMul, a, b, f);
}
inline double flex_div(double a, double b, const FlexFormat& f) {
  return flex_op(FlexOp::kDiv, a, b, f);
}

}  // namespace fptune
