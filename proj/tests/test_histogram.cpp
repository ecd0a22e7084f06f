#include <doctest.h>

#include <sstream>

#include "metrodiff/histogram.hpp"
#include "metrodiff/rng.hpp"

using namespace metrodiff;

namespace {

MeasurementRecord make_record(const std::string& metro,
                              const std::string& server, uint32_t asn,
                              double download, double rtt) {
  MeasurementRecord r;
  r.timestamp = 1736121600;
  r.metro = metro;
  r.server_id = server;
  r.server_asn = 64500;
  r.client_asn = asn;
  r.metrics[kDownloadMbps] = download;
  r.metrics[kMinRttMs] = rtt;
  return r;
}

MeasurementRecord random_record(Rng& rng) {
  static const char* metros[] = {"gru", "ams"};
  const std::string metro = metros[rng.below(2)];
  const std::string server = metro + "0" + std::to_string(1 + rng.below(3));
  const uint32_t asn = static_cast<uint32_t>(100 + rng.below(4));
  MeasurementRecord r = make_record(metro, server, asn,
                                    0.5 + 1000.0 * rng.uniform(),
                                    1.0 + 100.0 * rng.uniform());
  if (rng.uniform() < 0.3) r.metrics.erase(kMinRttMs);
  if (rng.uniform() < 0.1) r.metrics[kLossRate] = rng.uniform() < 0.5 ? 0.0 : rng.uniform();
  return r;
}

}  // namespace

TEST_CASE("insert stores exactly one bin per present metric") {
  SparseHistogram hist;
  hist.insert(make_record("gru", "gru02", 100, 87.5, 12.3));
  CHECK(hist.cells().size() == 2);  // one cell per metric
  for (const auto& [key, cell] : hist.cells()) {
    CHECK(cell.bins.size() == 1);
    CHECK(cell.total == 1);
  }
  hist.insert(make_record("gru", "gru02", 100, 87.5, 12.3));
  CellKey key{"gru", "gru02", 100, kDownloadMbps};
  auto dist = hist.cell_distribution(key);
  REQUIRE(dist.size() == 1);
  CHECK(dist[0].second == 2);
}

TEST_CASE("totals are conserved regardless of value spread") {
  SparseHistogram hist;
  Rng rng(7);
  for (int i = 0; i < 1000; ++i)
    hist.insert(make_record("gru", "gru02", 100,
                            0.5 + 900.0 * rng.uniform(), 10.0));
  CHECK(hist.cell_total({"gru", "gru02", 100, kDownloadMbps}) == 1000);
  CHECK(hist.cell_total({"gru", "gru02", 100, kMinRttMs}) == 1000);
}

TEST_CASE("zero loss_rate lands in the underflow bin") {
  SparseHistogram hist;
  MeasurementRecord r = make_record("gru", "gru02", 100, 50.0, 10.0);
  r.metrics[kLossRate] = 0.0;
  hist.insert(r);
  auto dist = hist.cell_distribution({"gru", "gru02", 100, kLossRate});
  REQUIRE(dist.size() == 1);
  CHECK(dist[0].first == kUnderflowBin);
}

TEST_CASE("merge identity and commutativity") {
  SparseHistogram a, b, empty;
  Rng rng(11);
  for (int i = 0; i < 50; ++i) a.insert(random_record(rng));
  for (int i = 0; i < 70; ++i) b.insert(random_record(rng));

  SparseHistogram a_copy = a;
  a_copy.merge(empty);
  CHECK(a_copy == a);

  SparseHistogram ab = a, ba = b;
  ab.merge(b);
  ba.merge(a);
  CHECK(ab == ba);
}

TEST_CASE("merge rejects mismatched schemes") {
  BinningScheme other;
  other.bins_per_decade = 10;
  SparseHistogram a, b(other);
  CHECK_THROWS_AS(a.merge(b), std::invalid_argument);
}

TEST_CASE("partitioned insertion then merge equals sequential insertion") {
  // 200 seeded random partitions, compared by full map equality.
  for (uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(derive_seed(424242, seed));
    const size_t n = 20 + rng.below(100);
    const size_t parts = 1 + rng.below(5);
    std::vector<MeasurementRecord> records;
    for (size_t i = 0; i < n; ++i) records.push_back(random_record(rng));

    SparseHistogram sequential;
    for (const auto& r : records) sequential.insert(r);

    std::vector<SparseHistogram> partitioned(parts);
    for (const auto& r : records) partitioned[rng.below(parts)].insert(r);
    SparseHistogram merged;
    for (const auto& h : partitioned) merged.merge(h);

    REQUIRE(merged == sequential);
    // No zero counts are ever stored.
    for (const auto& [key, cell] : merged.cells()) {
      uint64_t sum = 0;
      for (const auto& [bin, count] : cell.bins) {
        CHECK(count >= 1);
        sum += count;
      }
      CHECK(sum == cell.total);
    }
  }
}

TEST_CASE("cell_distribution is sorted; unknown key is empty") {
  SparseHistogram hist;
  hist.insert(make_record("gru", "gru02", 100, 5.0, 10.0));
  hist.insert(make_record("gru", "gru02", 100, 50.0, 10.0));
  BinningScheme ten;
  ten.bins_per_decade = 10;
  SparseHistogram h10(ten);
  h10.insert(make_record("gru", "gru02", 100, 5.0, 10.0));
  h10.insert(make_record("gru", "gru02", 100, 50.0, 10.0));
  auto dist = h10.cell_distribution({"gru", "gru02", 100, kDownloadMbps});
  REQUIRE(dist.size() == 2);
  CHECK(dist[1].first - dist[0].first == 10);  // one decade apart

  CHECK(hist.cell_distribution({"xxx", "xxx01", 1, kDownloadMbps}).empty());
  CHECK(hist.cell_total({"xxx", "xxx01", 1, kDownloadMbps}) == 0);
}

TEST_CASE("snapshot round-trips exactly") {
  Rng rng(55);
  SparseHistogram hist;
  BinningScheme rtt_scheme;
  rtt_scheme.bins_per_decade = 20;
  hist.set_scheme(kMinRttMs, rtt_scheme);
  for (int i = 0; i < 500; ++i) hist.insert(random_record(rng));
  // Force sentinel bins into the snapshot.
  hist.insert(make_record("gru", "gru02", 100, 1e9, 0.001));

  std::stringstream buf;
  hist.save(buf);
  SparseHistogram loaded = SparseHistogram::load(buf);
  CHECK(loaded == hist);

  std::stringstream again;
  loaded.save(again);
  std::stringstream first;
  hist.save(first);
  CHECK(again.str() == first.str());
}
