#include "fptune/flexnum.hpp"

#include <bit>
#include <cmath>
#include <limits>

#include "fptune/error.hpp"

namespace fptune {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kUnknownBenchmark: return "unknown-benchmark";
    case ErrorCode::kInvalidShape: return "invalid-shape";
    case ErrorCode::kConfigLengthMismatch: return "config-length-mismatch";
    case ErrorCode::kInvalidRange: return "invalid-range";
    case ErrorCode::kLengthMismatch: return "length-mismatch";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kParse: return "parse";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kWidthMismatch: return "width-mismatch";
    case ErrorCode::kNonpositiveTarget: return "nonpositive-target";
    case ErrorCode::kArityMismatch: return "arity-mismatch";
    case ErrorCode::kCapExceeded: return "cap-exceeded";
    case ErrorCode::kEmptyDataset: return "empty-dataset";
  }
  return "unknown";
}

FlexFormat FlexFormat::make(int mantissa_bits, int exponent_bits) {
  if (mantissa_bits < kMinMantissa || mantissa_bits > kMaxMantissa) {
    throw Error(ErrorCode::kInvalidArgument,
                "mantissa_bits out of range [1,52]: " +
                    std::to_string(mantissa_bits));
  }
  if (exponent_bits < kMinExponent || exponent_bits > kMaxExponent) {
    throw Error(ErrorCode::kInvalidArgument,
                "exponent_bits out of range [2,11]: " +
                    std::to_string(exponent_bits));
  }
  return FlexFormat{mantissa_bits, exponent_bits};
}

double FlexFormat::max_finite() const {
  // (2 - 2^-m) * 2^emax
  return std::ldexp(2.0 - std::ldexp(1.0, -mantissa_bits), max_exponent());
}

std::string to_string(const FlexFormat& fmt) {
  return "(m=" + std::to_string(fmt.mantissa_bits) +
         ",e=" + std::to_string(fmt.exponent_bits) + ")";
}

namespace {

// Round the binary64 encoding to `mantissa_bits` fraction bits in place.
// Valid whenever the target quantum equals 2^(52-m) binary64 ulps, i.e. for
// every finite input when the exponent field is 11 bits wide (binary64
// subnormals share the target's subnormal quantum). A carry out of the
// fraction bumps the exponent, and out of the top binade yields inf.
double round_bits(double x, int mantissa_bits) {
  const int shift = 52 - mantissa_bits;
  if (shift == 0) return x;
  std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const std::uint64_t sign = bits & 0x8000000000000000ULL;
  bits &= 0x7FFFFFFFFFFFFFFFULL;
  const std::uint64_t lsb = (bits >> shift) & 1U;
  const std::uint64_t half = std::uint64_t{1} << (shift - 1);
  bits += half - 1 + lsb;
  bits &= ~((std::uint64_t{1} << shift) - 1);
  return std::bit_cast<double>(bits | sign);
}

// General path for narrow exponent fields.
double round_generic(double x, const FlexFormat& fmt) {
  const double ax = std::fabs(x);
  const int emin = fmt.min_normal_exponent();
  int exp = std::ilogb(ax);
  if (exp < emin) exp = emin;
  // x / quantum is exact: scaling by a power of two inside binary64 range.
  const int scale = exp - fmt.mantissa_bits;
  const double scaled = std::ldexp(ax, -scale);
  const double rounded = std::nearbyint(scaled);  // ties to even
  double out = std::ldexp(rounded, scale);
  if (out > fmt.max_finite()) out = std::numeric_limits<double>::infinity();
  return std::copysign(out, x);
}

}  // namespace

double round_to_format(double x, const FlexFormat& fmt) {
  if (!std::isfinite(x) || x == 0.0) return x;
  if (fmt.exponent_bits == 11) return round_bits(x, fmt.mantissa_bits);
  return round_generic(x, fmt);
}

bool is_representable(double x, const FlexFormat& fmt) {
  if (std::isnan(x)) return true;
  return round_to_format(x, fmt) == x;
}

double flex_op(FlexOp kind, double a, double b, const FlexFormat& result_fmt) {
  double r = 0.0;
  switch (kind) {
    case FlexOp::kAdd: r = a + b; break;
    case FlexOp::kSub: r = a - b; break;
    case FlexOp::kMul: r = a * b; break;
    case FlexOp::kDiv: r = a / b; break;
  }
  return round_to_format(r, result_fmt);
}

}  // namespace fptune
