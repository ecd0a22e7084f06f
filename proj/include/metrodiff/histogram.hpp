#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "metrodiff/binning.hpp"
#include "metrodiff/record.hpp"

namespace metrodiff {

// Identifies one (metro, server, access ISP, metric) distribution.
struct CellKey {
  std::string metro;
  std::string server_id;
  uint32_t client_asn = 0;
  std::string metric;

  auto operator<=>(const CellKey&) const = default;
};

// Sparse multidimensional histogram: counts keyed by (cell, bin index).
// Zero counts are never stored. Insertion is single-pass and histograms
// merge by keywise addition, so partitioned inputs can be processed
// independently and combined.
class SparseHistogram {
 public:
  SparseHistogram() = default;
  explicit SparseHistogram(BinningScheme default_scheme)
      : default_scheme_(default_scheme) {}

  // Per-metric scheme override; unlisted metrics use the default scheme.
  void set_scheme(const std::string& metric, BinningScheme scheme);
  const BinningScheme& scheme_for(const std::string& metric) const;
  const BinningScheme& default_scheme() const { return default_scheme_; }
  const std::map<std::string, BinningScheme>& scheme_overrides() const {
    return scheme_overrides_;
  }

  // Each metric present in the record contributes exactly 1 to exactly
  // one bin of its cell.
  void insert(const MeasurementRecord& record);

  // Keywise sum. Throws std::invalid_argument on scheme mismatch.
  void merge(const SparseHistogram& other);

  // Sorted (bin index, count) entries for one cell; empty for unknown keys.
  std::vector<std::pair<int32_t, uint64_t>> cell_distribution(
      const CellKey& key) const;
  uint64_t cell_total(const CellKey& key) const;

  std::set<std::string> metros() const;
  std::set<std::string> servers_in_metro(const std::string& metro) const;
  std::set<uint32_t> isps_in_metro(const std::string& metro) const;
  std::set<std::string> metrics_present() const;

  // Total test count for one ISP in one metro, summed over servers and
  // metrics.
  uint64_t isp_total(const std::string& metro, uint32_t client_asn) const;

  uint64_t grand_total() const;
  bool empty() const { return cells_.empty(); }

  struct Cell {
    std::map<int32_t, uint64_t> bins;
    uint64_t total = 0;
    bool operator==(const Cell&) const = default;
  };
  const std::map<CellKey, Cell>& cells() const { return cells_; }

  bool operator==(const SparseHistogram& other) const;

  // Snapshot format: "#scheme" header lines followed by a delimited
  // (metro, server, client_asn, metric, bin_index, count) table. Loading
  // a snapshot reproduces the exact map.
  void save(std::ostream& out) const;
  static SparseHistogram load(std::istream& in);

 private:
  BinningScheme default_scheme_;
  std::map<std::string, BinningScheme> scheme_overrides_;
  std::map<CellKey, Cell> cells_;
};

}  // namespace metrodiff
