#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace equiride {

// A displayed surge multiplier, stored as an integer number of tenths so that
// levels can be used as exact map keys (1.4x == SurgeLevel{14}).
struct SurgeLevel {
  std::int32_t tenths{10};

  static SurgeLevel from_multiplier(double m) {
    return SurgeLevel{static_cast<std::int32_t>(std::lround(m * 10.0))};
  }

  double multiplier() const { return tenths / 10.0; }
  SurgeLevel next() const { return SurgeLevel{tenths + 1}; }
  SurgeLevel prev() const { return SurgeLevel{tenths - 1}; }

  // Continuous surge value at which the display jumps to next().
  double upper_cutoff() const { return (tenths + 0.5) / 10.0; }

  std::string str() const {
    return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
  }

  friend auto operator<=>(SurgeLevel, SurgeLevel) = default;
};

inline constexpr SurgeLevel kNoSurge{10};

}  // namespace equiride
