#include <doctest.h>

#include "metrodiff/analysis.hpp"
#include "metrodiff/rng.hpp"

using namespace metrodiff;

namespace {

void fill_cell(SparseHistogram& hist, const std::string& metro,
               const std::string& server, uint32_t asn, int n,
               double center_value, uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    MeasurementRecord r;
    r.timestamp = 1736121600 + i;
    r.metro = metro;
    r.server_id = server;
    r.server_asn = 64500;
    r.client_asn = asn;
    r.metrics[kDownloadMbps] = rng.lognormal10(center_value, 0.1);
    r.metrics[kMinRttMs] = rng.lognormal10(20.0, 0.05);
    hist.insert(r);
  }
}

}  // namespace

TEST_CASE("top_isps ranks by total count with ASN tie-break") {
  SparseHistogram hist;
  fill_cell(hist, "gru", "gru02", 100, 900, 50.0, 1);
  fill_cell(hist, "gru", "gru02", 200, 1100, 50.0, 2);
  auto top = top_isps(hist, "gru", 5);
  REQUIRE(top.size() == 2);
  CHECK(top[0] == 200);
  CHECK(top[1] == 100);

  CHECK(top_isps(hist, "gru", 1) == std::vector<uint32_t>{200});
  CHECK(top_isps(hist, "nowhere", 5).empty());

  // Equal counts break by ascending ASN.
  SparseHistogram tie;
  fill_cell(tie, "gru", "gru02", 300, 500, 50.0, 3);
  fill_cell(tie, "gru", "gru02", 150, 500, 50.0, 4);
  auto tied = top_isps(tie, "gru", 5);
  CHECK(tied == std::vector<uint32_t>({150, 300}));
}

TEST_CASE("pairwise_diffs produces C(3,2) pairs for one eligible ISP") {
  SparseHistogram hist;
  for (const char* server : {"gru02", "gru03", "gru06"})
    fill_cell(hist, "gru", server, 100, 300, 50.0, 10);
  AnalysisConfig config;
  config.metrics = {kDownloadMbps};
  std::vector<SkippedCell> skipped;
  auto pairs = pairwise_diffs(hist, config, &skipped);
  CHECK(pairs.size() == 3);
  CHECK(skipped.empty());
  for (const auto& pr : pairs) {
    CHECK(pr.server_a < pr.server_b);
    CHECK(pr.metro == "gru");
    CHECK(pr.stat.n_a == 300);
  }
}

TEST_CASE("cells below the sample gate are skipped and reported") {
  SparseHistogram hist;
  fill_cell(hist, "gru", "gru02", 100, 300, 50.0, 20);
  fill_cell(hist, "gru", "gru03", 100, 300, 50.0, 21);
  fill_cell(hist, "gru", "gru06", 100, 50, 50.0, 22);  // below 100
  AnalysisConfig config;
  config.metrics = {kDownloadMbps};
  std::vector<SkippedCell> skipped;
  auto pairs = pairwise_diffs(hist, config, &skipped);
  CHECK(pairs.size() == 1);  // only gru02 x gru03
  REQUIRE(skipped.size() == 1);
  CHECK(skipped[0].server_id == "gru06");
  CHECK(skipped[0].samples == 50);

  // Raising the gate never adds results.
  AnalysisConfig strict = config;
  strict.min_samples_per_cell = 301;
  std::vector<SkippedCell> skipped2;
  CHECK(pairwise_diffs(hist, strict, &skipped2).empty());
}

TEST_CASE("completeness across eligible ISPs") {
  SparseHistogram hist;
  // ISP 100 eligible on 3 servers, ISP 200 on 2 servers.
  for (const char* server : {"gru02", "gru03", "gru06"})
    fill_cell(hist, "gru", server, 100, 200, 50.0, 30);
  fill_cell(hist, "gru", "gru02", 200, 200, 50.0, 31);
  fill_cell(hist, "gru", "gru03", 200, 200, 50.0, 32);
  AnalysisConfig config;
  config.metrics = {kDownloadMbps};
  auto pairs = pairwise_diffs(hist, config, nullptr);
  CHECK(pairs.size() == 3 + 1);  // C(3,2) + C(2,2)
}

TEST_CASE("metro_summaries selects the worst pair per metric") {
  PairResult a{"gru", 100, "gru02", "gru03", kDownloadMbps, {}, 1.2};
  PairResult b{"gru", 100, "gru02", "gru06", kDownloadMbps, {}, 3.0};
  PairResult c{"gru", 100, "gru03", "gru06", kDownloadMbps, {}, 0.4};
  AnalysisConfig config;
  auto summaries = metro_summaries({a, b, c}, config);
  REQUIRE(summaries.size() == 1);
  CHECK(summaries[0].worst_by_metric.at(kDownloadMbps).pain == 3.0);
  CHECK(summaries[0].server_count == 3);

  CHECK(metro_summaries({}, config).empty());

  PairResult other{"ams", 100, "ams01", "ams02", kDownloadMbps, {}, 0.5};
  auto two = metro_summaries({a, other}, config);
  CHECK(two.size() == 2);
}

TEST_CASE("calibration flags") {
  SparseHistogram hist;
  // Matching distributions: all pairwise KS near zero.
  uint64_t seed = 40;
  for (const char* server : {"gru02", "gru03", "gru06"})
    fill_cell(hist, "gru", server, 100, 5000, 50.0, seed++);
  AnalysisConfig config;
  config.metrics = {kDownloadMbps};
  auto result = run_analysis(hist, config);
  REQUIRE(result.calibration.size() == 3);
  for (const auto& cal : result.calibration)
    CHECK(cal.flag == CalibrationFlag::kCalibrated);

  // One server with a disjoint distribution: every pair it joins has
  // KS = 1, so it is SUSPECT while the others still match each other.
  SparseHistogram skewed;
  fill_cell(skewed, "gru", "gru02", 100, 2000, 50.0, 41);
  fill_cell(skewed, "gru", "gru03", 100, 2000, 50.0, 42);
  fill_cell(skewed, "gru", "gru06", 100, 2000, 2000.0, 43);
  auto skew_result = run_analysis(skewed, config);
  for (const auto& cal : skew_result.calibration) {
    if (cal.server_id == "gru06")
      CHECK(cal.flag == CalibrationFlag::kSuspect);
    else
      CHECK(cal.flag == CalibrationFlag::kCalibrated);
  }

  // A server with no eligible pairs.
  SparseHistogram sparse;
  fill_cell(sparse, "gru", "gru02", 100, 2000, 50.0, 44);
  fill_cell(sparse, "gru", "gru03", 100, 2000, 50.0, 45);
  fill_cell(sparse, "gru", "gru06", 100, 10, 50.0, 46);
  auto sparse_result = run_analysis(sparse, config);
  for (const auto& cal : sparse_result.calibration) {
    if (cal.server_id == "gru06")
      CHECK(cal.flag == CalibrationFlag::kInsufficientData);
    else
      CHECK(cal.flag == CalibrationFlag::kCalibrated);
  }
}

TEST_CASE("worst-case consistency and determinism") {
  SparseHistogram hist;
  Rng rng(50);
  for (const char* metro : {"gru", "ams"}) {
    for (int s = 1; s <= 3; ++s) {
      for (uint32_t asn : {100u, 200u, 300u}) {
        fill_cell(hist, metro, std::string(metro) + "0" + std::to_string(s),
                  asn, 150 + static_cast<int>(rng.below(100)),
                  20.0 + 80.0 * rng.uniform(), rng.below(1u << 30));
      }
    }
  }
  AnalysisConfig config;
  auto r1 = run_analysis(hist, config);
  auto r2 = run_analysis(hist, config);
  REQUIRE(r1.pairs.size() == r2.pairs.size());
  for (size_t i = 0; i < r1.pairs.size(); ++i) {
    CHECK(r1.pairs[i].pain == r2.pairs[i].pain);
    CHECK(r1.pairs[i].server_a == r2.pairs[i].server_a);
  }
  for (const auto& summary : r1.summaries) {
    for (const auto& [metric, worst] : summary.worst_by_metric) {
      bool found = false;
      double max_pain = 0.0;
      for (const auto& pr : r1.pairs) {
        if (pr.metro != summary.metro || pr.metric != metric) continue;
        max_pain = std::max(max_pain, pr.pain);
        found |= pr.pain == worst.pain && pr.server_a == worst.server_a &&
                 pr.server_b == worst.server_b;
      }
      CHECK(found);
      CHECK(worst.pain == max_pain);
    }
  }
}

TEST_CASE("config validation") {
  AnalysisConfig config;
  config.top_n_isps = 0;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = AnalysisConfig{};
  config.metrics.clear();
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
  config = AnalysisConfig{};
  config.calibration_ks_threshold = 1.5;
  CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
