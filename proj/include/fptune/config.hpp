#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

namespace fptune {

// Default global mantissa range for tunable slots.
inline constexpr int kDefaultNbitMin = 2;
inline constexpr int kDefaultNbitMax = 52;

// Mantissa bit-width per tunable slot.
struct PrecisionConfig {
  std::vector<int> bits;

  PrecisionConfig() = default;
  explicit PrecisionConfig(std::vector<int> b) : bits(std::move(b)) {}
  PrecisionConfig(std::initializer_list<int> b) : bits(b) {}

  static PrecisionConfig uniform(std::size_t n, int value) {
    return PrecisionConfig(std::vector<int>(n, value));
  }

  std::size_t size() const { return bits.size(); }
  int operator[](std::size_t i) const { return bits[i]; }
  int& operator[](std::size_t i) { return bits[i]; }

  long total_bits() const {
    return std::accumulate(bits.begin(), bits.end(), 0L);
  }

  auto operator<=>(const PrecisionConfig&) const = default;
  bool operator==(const PrecisionConfig&) const = default;
};

std::string to_string(const PrecisionConfig& config);

struct PrecisionConfigHash {
  std::size_t operator()(const PrecisionConfig& c) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (int b : c.bits) {
      h ^= static_cast<std::size_t>(b) + 0x9e3779b97f4a7c15ULL + (h << 6) +
           (h >> 2);
    }
    return h;
  }
};

}  // namespace fptune
