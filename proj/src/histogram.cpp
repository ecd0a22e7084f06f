#include "metrodiff/histogram.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace metrodiff {
namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void SparseHistogram::set_scheme(const std::string& metric,
                                 BinningScheme scheme) {
  scheme.validate();
  scheme_overrides_[metric] = scheme;
}

const BinningScheme& SparseHistogram::scheme_for(
    const std::string& metric) const {
  auto it = scheme_overrides_.find(metric);
  return it == scheme_overrides_.end() ? default_scheme_ : it->second;
}

void SparseHistogram::insert(const MeasurementRecord& record) {
  for (const auto& [metric, value] : record.metrics) {
    CellKey key{record.metro, record.server_id, record.client_asn, metric};
    const BinningScheme& scheme = scheme_for(metric);
    // loss_rate may legally be 0, which cannot be log-binned; it lands in
    // the underflow bin so every value still maps to exactly one bin.
    int32_t bin = (value == 0.0 && metric == kLossRate)
                      ? kUnderflowBin
                      : scheme.bin_index(value);
    Cell& cell = cells_[key];
    ++cell.bins[bin];
    ++cell.total;
  }
}

void SparseHistogram::merge(const SparseHistogram& other) {
  if (!(default_scheme_ == other.default_scheme_) ||
      scheme_overrides_ != other.scheme_overrides_) {
    throw std::invalid_argument("cannot merge histograms with different schemes");
  }
  for (const auto& [key, ocell] : other.cells_) {
    Cell& cell = cells_[key];
    for (const auto& [bin, count] : ocell.bins) cell.bins[bin] += count;
    cell.total += ocell.total;
  }
}

std::vector<std::pair<int32_t, uint64_t>> SparseHistogram::cell_distribution(
    const CellKey& key) const {
  std::vector<std::pair<int32_t, uint64_t>> out;
  auto it = cells_.find(key);
  if (it == cells_.end()) return out;
  out.assign(it->second.bins.begin(), it->second.bins.end());
  return out;
}

uint64_t SparseHistogram::cell_total(const CellKey& key) const {
  auto it = cells_.find(key);
  return it == cells_.end() ? 0 : it->second.total;
}

std::set<std::string> SparseHistogram::metros() const {
  std::set<std::string> out;
  for (const auto& [key, _] : cells_) out.insert(key.metro);
  return out;
}

std::set<std::string> SparseHistogram::servers_in_metro(
    const std::string& metro) const {
  std::set<std::string> out;
  for (const auto& [key, _] : cells_)
    if (key.metro == metro) out.insert(key.server_id);
  return out;
}

std::set<uint32_t> SparseHistogram::isps_in_metro(
    const std::string& metro) const {
  std::set<uint32_t> out;
  for (const auto& [key, _] : cells_)
    if (key.metro == metro) out.insert(key.client_asn);
  return out;
}

std::set<std::string> SparseHistogram::metrics_present() const {
  std::set<std::string> out;
  for (const auto& [key, _] : cells_) out.insert(key.metric);
  return out;
}

uint64_t SparseHistogram::isp_total(const std::string& metro,
                                    uint32_t client_asn) const {
  uint64_t total = 0;
  for (const auto& [key, cell] : cells_)
    if (key.metro == metro && key.client_asn == client_asn) total += cell.total;
  return total;
}

uint64_t SparseHistogram::grand_total() const {
  uint64_t total = 0;
  for (const auto& [_, cell] : cells_) total += cell.total;
  return total;
}

bool SparseHistogram::operator==(const SparseHistogram& other) const {
  return default_scheme_ == other.default_scheme_ &&
         scheme_overrides_ == other.scheme_overrides_ &&
         cells_ == other.cells_;
}

void SparseHistogram::save(std::ostream& out) const {
  auto write_scheme = [&](const std::string& label, const BinningScheme& s) {
    out << "#scheme " << label << " bins_per_decade=" << s.bins_per_decade
        << " reference=" << fmt_double(s.reference)
        << " underflow_below=" << fmt_double(s.underflow_below)
        << " overflow_above=" << fmt_double(s.overflow_above) << "\n";
  };
  write_scheme("default", default_scheme_);
  for (const auto& [metric, scheme] : scheme_overrides_)
    write_scheme("metric=" + metric, scheme);
  out << "metro,server_id,client_asn,metric,bin_index,count\n";
  for (const auto& [key, cell] : cells_) {
    for (const auto& [bin, count] : cell.bins) {
      out << key.metro << ',' << key.server_id << ',' << key.client_asn << ','
          << key.metric << ',' << bin << ',' << count << "\n";
    }
  }
}

SparseHistogram SparseHistogram::load(std::istream& in) {
  SparseHistogram hist;
  std::string line;
  bool saw_header = false;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.rfind("#scheme ", 0) == 0) {
      std::istringstream ss(line.substr(8));
      std::string label, kv;
      ss >> label;
      BinningScheme scheme;
      while (ss >> kv) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::runtime_error("bad scheme token: " + kv);
        std::string k = kv.substr(0, eq), v = kv.substr(eq + 1);
        if (k == "bins_per_decade") scheme.bins_per_decade = std::stoi(v);
        else if (k == "reference") scheme.reference = std::stod(v);
        else if (k == "underflow_below") scheme.underflow_below = std::stod(v);
        else if (k == "overflow_above") scheme.overflow_above = std::stod(v);
        else throw std::runtime_error("unknown scheme key: " + k);
      }
      scheme.validate();
      if (label == "default") {
        hist.default_scheme_ = scheme;
      } else if (label.rfind("metric=", 0) == 0) {
        hist.scheme_overrides_[label.substr(7)] = scheme;
      } else {
        throw std::runtime_error("unknown scheme label: " + label);
      }
      continue;
    }
    if (!saw_header) {
      if (line != "metro,server_id,client_asn,metric,bin_index,count")
        throw std::runtime_error("unexpected snapshot header: " + line);
      saw_header = true;
      continue;
    }
    auto fields = split(line, ',');
    if (fields.size() != 6)
      throw std::runtime_error("snapshot line " + std::to_string(line_no) +
                               ": expected 6 fields");
    CellKey key{fields[0], fields[1],
                static_cast<uint32_t>(std::stoul(fields[2])), fields[3]};
    int64_t bin = std::stoll(fields[4]);
    uint64_t count = std::stoull(fields[5]);
    if (count == 0)
      throw std::runtime_error("snapshot stores a zero count at line " +
                               std::to_string(line_no));
    Cell& cell = hist.cells_[key];
    cell.bins[static_cast<int32_t>(bin)] += count;
    cell.total += count;
  }
  return hist;
}

}  // namespace metrodiff
