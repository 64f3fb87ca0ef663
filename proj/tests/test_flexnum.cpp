#include <doctest.h>

#include <bit>
#include <cmath>
#include <limits>
#include <random>

#include "fptune/error.hpp"
#include "fptune/flexnum.hpp"
#include "oracles.hpp"

using namespace fptune;

namespace {

double log_uniform(std::mt19937_64& rng, double lo_exp, double hi_exp) {
  std::uniform_real_distribution<double> e(lo_exp, hi_exp);
  std::bernoulli_distribution neg(0.5);
  const double v = std::exp2(e(rng));
  return neg(rng) ? -v : v;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

}  // namespace

TEST_SUITE("flexnum") {

TEST_CASE("format construction validates widths") {
  CHECK(FlexFormat::make(10).mantissa_bits == 10);
  CHECK(FlexFormat::make(10).exponent_bits == 11);
  CHECK_THROWS_AS(FlexFormat::make(0), Error);
  CHECK_THROWS_AS(FlexFormat::make(53), Error);
  CHECK_THROWS_AS(FlexFormat::make(10, 1), Error);
  CHECK_THROWS_AS(FlexFormat::make(10, 12), Error);
  CHECK(FlexFormat::binary64().max_finite() == std::numeric_limits<double>::max());
  // binary16: 10 mantissa bits, 5 exponent bits, largest finite 65504.
  CHECK(FlexFormat::make(10, 5).max_finite() == 65504.0);
}

TEST_CASE("worked rounding examples") {
  CHECK(round_to_format(1.0, FlexFormat::make(3)) == 1.0);
  CHECK(round_to_format(0.1, FlexFormat::make(2)) == 0.09375);
  CHECK(flex_add(1.0, 1.0, FlexFormat::make(3)) == 2.0);
  CHECK(flex_add(1.0, std::ldexp(1.0, -10), FlexFormat::make(5)) == 1.0);
  CHECK(oracle::round_enumerated(1.0 + std::ldexp(1.0, -10), 5, 11) == 1.0);
  // Ties go to the even significand: 1 + 2^-3 is halfway between 1 and
  // 1.25 at 2 mantissa bits; 1 + 3*2^-3 is halfway between 1.25 and 1.5.
  CHECK(round_to_format(1.125, FlexFormat::make(2)) == 1.0);
  CHECK(round_to_format(1.375, FlexFormat::make(2)) == 1.5);
}

TEST_CASE("special values pass through") {
  const auto f = FlexFormat::make(4, 5);
  CHECK(std::isnan(round_to_format(std::nan(""), f)));
  CHECK(round_to_format(INFINITY, f) == INFINITY);
  CHECK(round_to_format(-INFINITY, f) == -INFINITY);
  CHECK(std::signbit(round_to_format(-0.0, f)));
  CHECK(round_to_format(1e6, f) == INFINITY);
  CHECK(round_to_format(-1e6, f) == -INFINITY);
}

TEST_CASE("binary64 format is the identity") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::bit_cast<double>(rng());
    if (std::isnan(x)) continue;
    CHECK(same_bits(round_to_format(x, FlexFormat::binary64()), x));
  }
}

TEST_CASE("rounding matches enumeration oracle, 11-bit exponent") {
  std::mt19937_64 rng(2024);
  long mismatches = 0;
  for (int m = 1; m <= 6; ++m) {
    const auto f = FlexFormat::make(m);
    for (int i = 0; i < 2000; ++i) {
      const double x = log_uniform(rng, -1074.0, 1023.99);
      mismatches += !same_bits(round_to_format(x, f), oracle::round_enumerated(x, m, 11));
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("rounding matches enumeration oracle, narrow exponents") {
  std::mt19937_64 rng(99);
  long mismatches = 0;
  for (int e : {3, 5, 8}) {
    for (int m = 1; m <= 6; ++m) {
      const auto f = FlexFormat::make(m, e);
      const double span = (1 << (e - 1)) + m + 2.0;
      for (int i = 0; i < 2000; ++i) {
        const double x = log_uniform(rng, -span, span);
        mismatches +=
            !same_bits(round_to_format(x, f), oracle::round_enumerated(x, m, e));
      }
    }
  }
  CHECK(mismatches == 0);
}

TEST_CASE("ties and midpoints match the oracle exactly") {
  long mismatches = 0;
  for (int m = 1; m <= 6; ++m) {
    const auto& table = oracle::format_table(m, 5);
    const auto f = FlexFormat::make(m, 5);
    for (std::size_t i = 1; i < table.values.size(); ++i) {
      const double mid = 0.5 * (table.values[i - 1] + table.values[i]);
      for (double x : {mid, std::nextafter(mid, 0.0), std::nextafter(mid, 1e9)}) {
        mismatches += !same_bits(round_to_format(x, f), oracle::round_enumerated(x, m, 5));
      }
    }
    const double top = static_cast<double>(
        0.5L * (static_cast<long double>(table.values.back()) + table.overflow_point));
    mismatches += !same_bits(round_to_format(top, f), oracle::round_enumerated(top, m, 5));
  }
  CHECK(mismatches == 0);
}

TEST_CASE("rounding is idempotent, monotone and sign symmetric") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20000; ++i) {
    const int m = 1 + static_cast<int>(rng() % 52);
    const int e = 2 + static_cast<int>(rng() % 10);
    const auto f = FlexFormat::make(m, e);
    const double x = log_uniform(rng, -(1 << (e - 1)) - 60.0, (1 << (e - 1)) + 1.0);
    const double y = log_uniform(rng, -(1 << (e - 1)) - 60.0, (1 << (e - 1)) + 1.0);
    const double rx = round_to_format(x, f);
    REQUIRE(same_bits(round_to_format(rx, f), rx));
    if (std::isfinite(rx)) CHECK(is_representable(rx, f));
    CHECK(same_bits(round_to_format(-x, f), -rx));
    if (x <= y) CHECK(rx <= round_to_format(y, f));
  }
}

TEST_CASE("52-bit operations are bit-identical to binary64") {
  std::mt19937_64 rng(77);
  const auto f = FlexFormat::binary64();
  long mismatches = 0;
  for (int i = 0; i < 20000; ++i) {
    const double a = log_uniform(rng, -1000.0, 1000.0);
    const double b = log_uniform(rng, -1000.0, 1000.0);
    mismatches += !same_bits(flex_add(a, b, f), a + b);
    mismatches += !same_bits(flex_sub(a, b, f), a - b);
    mismatches += !same_bits(flex_mul(a, b, f), a * b);
    mismatches += !same_bits(flex_div(a, b, f), a / b);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("reduced operations round the exact result once") {
  // For m <= 24 the binary64 result of +,-,* on m-bit operands is exact or
  // already correctly rounded beyond m bits, so a single rounding suffices.
  std::mt19937_64 rng(8);
  for (int i = 0; i < 5000; ++i) {
    const int m = 1 + static_cast<int>(rng() % 6);
    const auto f = FlexFormat::make(m);
    const double a = round_to_format(log_uniform(rng, -20, 20), f);
    const double b = round_to_format(log_uniform(rng, -20, 20), f);
    CHECK(same_bits(flex_mul(a, b, f), oracle::round_enumerated(a * b, m, 11)));
    CHECK(same_bits(flex_add(a, b, f), oracle::round_enumerated(a + b, m, 11)));
  }
}

}  // TEST_SUITE
