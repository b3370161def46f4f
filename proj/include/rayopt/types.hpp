#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace rayopt {

/// Fixed-point energy. All solver arithmetic is exact integer arithmetic on
/// values scaled by a FixedPointScale.
using Energy = std::int64_t;

/// Semantic label index. Label sets are small (the free-space label plus a
/// handful of classes).
using Label = std::uint8_t;

using VoxelId = std::uint32_t;

inline constexpr double kDefaultFixedPointScale = 1e4;

class FixedPointScale {
 public:
  explicit FixedPointScale(double factor = kDefaultFixedPointScale) : factor_(factor) {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
      throw std::invalid_argument("fixed-point scale must be positive and finite");
    }
  }

  double factor() const { return factor_; }

  Energy to_fixed(double value) const {
    const double scaled = std::round(value * factor_);
    if (!std::isfinite(scaled) || std::fabs(scaled) > 4.0e18) {
      throw std::overflow_error("energy value out of fixed-point range");
    }
    return static_cast<Energy>(scaled);
  }

  double to_real(Energy value) const { return static_cast<double>(value) / factor_; }

 private:
  double factor_;
};

inline Energy checked_add(Energy a, Energy b) {
  Energy out;
  if (__builtin_add_overflow(a, b, &out)) throw std::overflow_error("energy overflow");
  return out;
}

inline Energy checked_mul(Energy a, Energy b) {
  Energy out;
  if (__builtin_mul_overflow(a, b, &out)) throw std::overflow_error("energy overflow");
  return out;
}

}  // namespace rayopt
