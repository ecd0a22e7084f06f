#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "metrodiff/binning.hpp"
#include "metrodiff/histogram.hpp"

namespace metrodiff {

// One binned distribution extracted from a histogram cell.
struct BinnedDistribution {
  BinningScheme scheme;
  std::vector<std::pair<int32_t, uint64_t>> entries;  // sorted, counts >= 1
  uint64_t total = 0;

  static BinnedDistribution from_cell(const SparseHistogram& hist,
                                      const CellKey& key);
};

// Difference statistics for one pair of distributions.
struct DifferenceStat {
  double ks_distance = 0.0;
  double spread = 1.0;         // GM_a / GM_b
  double spread_folded = 1.0;  // max(spread, 1/spread)
  double pain_ks = 0.0;        // 10 * ks_distance
  uint64_t n_a = 0;
  uint64_t n_b = 0;
};

enum class PainMode { kKs, kSpread };

// Step CDF over occupied bins: (bin index, cumulative fraction), strictly
// increasing, final value exactly 1. Throws on an empty distribution.
std::vector<std::pair<int32_t, double>> cdf(const BinnedDistribution& dist);

// Maximum vertical separation between the two step CDFs, evaluated over
// the union of occupied bin boundaries. Requires a shared scheme.
double ks_distance(const BinnedDistribution& a, const BinnedDistribution& b);

// exp of the count-weighted mean of log bin centers. Sentinel bins
// contribute their boundary value.
double geometric_mean(const BinnedDistribution& dist);

// Fraction of mass sitting in the underflow/overflow sentinel bins.
double sentinel_mass_fraction(const BinnedDistribution& dist);

// (GM_a / GM_b, folded to >= 1).
std::pair<double, double> spread(const BinnedDistribution& a,
                                 const BinnedDistribution& b);

DifferenceStat difference_stat(const BinnedDistribution& a,
                               const BinnedDistribution& b);

double pain_score(const DifferenceStat& stat, PainMode mode);

}  // namespace metrodiff
