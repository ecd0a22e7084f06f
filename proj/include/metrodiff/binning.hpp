#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>

namespace metrodiff {

// Sentinel bin indices. They sort below/above every regular bin so that
// CDFs over a sorted bin list naturally include the tails.
inline constexpr int32_t kUnderflowBin = std::numeric_limits<int32_t>::min();
inline constexpr int32_t kOverflowBin = std::numeric_limits<int32_t>::max();

// Logarithmic bin geometry shared by every histogram cell of a metric.
// Bin index for a value v strictly inside (underflow_below, overflow_above):
//   floor(bins_per_decade * log10(v / reference))
// Boundaries are half-open [lower, upper); a value exactly on a boundary
// belongs to the upper bin.
struct BinningScheme {
  int bins_per_decade = 30;
  double reference = 1.0;
  double underflow_below = 0.01;
  double overflow_above = 1e5;

  bool operator==(const BinningScheme&) const = default;

  void validate() const;

  // value must be positive and finite; throws std::invalid_argument otherwise.
  int32_t bin_index(double value) const;

  // Inclusive lower / exclusive upper boundary of a regular bin.
  double lower_bound(int32_t index) const;
  double upper_bound(int32_t index) const;

  // Geometric (log-midpoint) center of a regular bin. Sentinel bins are
  // represented by their boundary value.
  double center(int32_t index) const;
};

}  // namespace metrodiff
