#include "metrodiff/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metrodiff {

BinnedDistribution BinnedDistribution::from_cell(const SparseHistogram& hist,
                                                 const CellKey& key) {
  BinnedDistribution dist;
  dist.scheme = hist.scheme_for(key.metric);
  dist.entries = hist.cell_distribution(key);
  dist.total = hist.cell_total(key);
  return dist;
}

std::vector<std::pair<int32_t, double>> cdf(const BinnedDistribution& dist) {
  if (dist.total == 0 || dist.entries.empty())
    throw std::invalid_argument("cdf of an empty distribution");
  std::vector<std::pair<int32_t, double>> out;
  out.reserve(dist.entries.size());
  uint64_t running = 0;
  for (const auto& [bin, count] : dist.entries) {
    running += count;
    out.emplace_back(bin, static_cast<double>(running) /
                              static_cast<double>(dist.total));
  }
  return out;
}

double ks_distance(const BinnedDistribution& a, const BinnedDistribution& b) {
  if (!(a.scheme == b.scheme))
    throw std::invalid_argument("ks_distance requires a shared binning scheme");
  if (a.total == 0 || b.total == 0)
    throw std::invalid_argument("ks_distance of an empty distribution");
  // Walk the union of occupied bins; both step CDFs only move at those
  // boundaries, so the maximum separation occurs at one of them.
  size_t ia = 0, ib = 0;
  uint64_t ca = 0, cb = 0;
  double worst = 0.0;
  while (ia < a.entries.size() || ib < b.entries.size()) {
    int64_t next_a = ia < a.entries.size() ? a.entries[ia].first
                                           : std::numeric_limits<int64_t>::max();
    int64_t next_b = ib < b.entries.size() ? b.entries[ib].first
                                           : std::numeric_limits<int64_t>::max();
    int64_t bin = std::min(next_a, next_b);
    if (next_a == bin) ca += a.entries[ia++].second;
    if (next_b == bin) cb += b.entries[ib++].second;
    double fa = static_cast<double>(ca) / static_cast<double>(a.total);
    double fb = static_cast<double>(cb) / static_cast<double>(b.total);
    worst = std::max(worst, std::abs(fa - fb));
  }
  return worst;
}

double geometric_mean(const BinnedDistribution& dist) {
  if (dist.total == 0 || dist.entries.empty())
    throw std::invalid_argument("geometric_mean of an empty distribution");
  double log_sum = 0.0;
  for (const auto& [bin, count] : dist.entries)
    log_sum += static_cast<double>(count) * std::log(dist.scheme.center(bin));
  return std::exp(log_sum / static_cast<double>(dist.total));
}

double sentinel_mass_fraction(const BinnedDistribution& dist) {
  if (dist.total == 0) return 0.0;
  uint64_t mass = 0;
  for (const auto& [bin, count] : dist.entries)
    if (bin == kUnderflowBin || bin == kOverflowBin) mass += count;
  return static_cast<double>(mass) / static_cast<double>(dist.total);
}

std::pair<double, double> spread(const BinnedDistribution& a,
                                 const BinnedDistribution& b) {
  const double ratio = geometric_mean(a) / geometric_mean(b);
  return {ratio, std::max(ratio, 1.0 / ratio)};
}

DifferenceStat difference_stat(const BinnedDistribution& a,
                               const BinnedDistribution& b) {
  DifferenceStat stat;
  stat.ks_distance = ks_distance(a, b);
  auto [ratio, folded] = spread(a, b);
  stat.spread = ratio;
  stat.spread_folded = folded;
  stat.pain_ks = 10.0 * stat.ks_distance;
  stat.n_a = a.total;
  stat.n_b = b.total;
  return stat;
}

double pain_score(const DifferenceStat& stat, PainMode mode) {
  return mode == PainMode::kKs ? 10.0 * stat.ks_distance : stat.spread_folded;
}

}  // namespace metrodiff
