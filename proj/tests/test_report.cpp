#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "metrodiff/report.hpp"
#include "metrodiff/rng.hpp"

using namespace metrodiff;

namespace {

SparseHistogram sample_histogram() {
  SparseHistogram hist;
  Rng rng(71);
  for (const char* server : {"gru02", "gru03", "gru06"}) {
    for (int i = 0; i < 500; ++i) {
      MeasurementRecord r;
      r.timestamp = 1736121600 + i;
      r.metro = "gru";
      r.server_id = server;
      r.server_asn = 64500;
      r.client_asn = 28573;
      r.metrics[kDownloadMbps] = rng.lognormal10(80.0, 0.3);
      r.metrics[kMinRttMs] = rng.lognormal10(20.0, 0.1);
      hist.insert(r);
    }
  }
  return hist;
}

ReportBundle sample_bundle(const SparseHistogram& hist,
                           const AnalysisConfig& config) {
  auto analysis = run_analysis(hist, config);
  RunMetadata meta;
  meta.input_digest = "abc123";
  meta.data_start = 1736121600;
  meta.data_end = 1736121600 + 499;
  meta.config_json = "{\"top_isps\": 5}";
  meta.ingest.total = meta.ingest.accepted = 1500;
  return build_bundle(hist, analysis, std::move(meta), config);
}

}  // namespace

TEST_CASE("plot document densities sum to one and labels are complete") {
  auto hist = sample_histogram();
  auto doc = build_plot_document(hist, "gru", 28573, kDownloadMbps, 100);
  REQUIRE(doc.series.size() == 3);
  for (const auto& s : doc.series) {
    double sum = std::accumulate(s.density.begin(), s.density.end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-9);
    CHECK(std::abs(s.cumulative.back() - 1.0) <= 1e-9);
    // Cumulative is the running sum of density.
    double running = 0.0;
    for (size_t i = 0; i < s.density.size(); ++i) {
      running += s.density[i];
      CHECK(std::abs(s.cumulative[i] - running) <= 1e-9);
    }
    CHECK(s.label.find("AS28573") != std::string::npos);
    CHECK(s.label.find("(n=" + std::to_string(s.total) + ")") !=
          std::string::npos);
  }
}

TEST_CASE("servers below the gate move to the footnote") {
  auto hist = sample_histogram();
  MeasurementRecord r;
  r.timestamp = 1736121600;
  r.metro = "gru";
  r.server_id = "gru09";
  r.server_asn = 64500;
  r.client_asn = 28573;
  r.metrics[kDownloadMbps] = 50.0;
  hist.insert(r);
  auto doc = build_plot_document(hist, "gru", 28573, kDownloadMbps, 100);
  CHECK(doc.series.size() == 3);
  REQUIRE(doc.footnote.size() == 1);
  CHECK(doc.footnote[0].server_id == "gru09");
  CHECK(doc.footnote[0].samples == 1);
}

TEST_CASE("unknown plot key yields an explanatory note") {
  auto hist = sample_histogram();
  auto doc = build_plot_document(hist, "ams", 1, kDownloadMbps, 100);
  CHECK(doc.series.empty());
  CHECK(!doc.note.empty());
  auto json = emit_plot_json(doc);
  CHECK(json.find("note") != std::string::npos);
}

TEST_CASE("summary emission is idempotent and carries metadata") {
  auto hist = sample_histogram();
  AnalysisConfig config;
  auto bundle = sample_bundle(hist, config);
  auto a = emit_summary(bundle, SummaryFormat::kJson);
  auto b = emit_summary(bundle, SummaryFormat::kJson);
  CHECK(a == b);
  CHECK(a.find("\"schema_version\"") != std::string::npos);
  CHECK(a.find("abc123") != std::string::npos);
  CHECK(a.find("\"top_isps\": 5") != std::string::npos);

  auto delim = emit_summary(bundle, SummaryFormat::kDelimited);
  CHECK(delim.find("metro,metric,worst_pain") != std::string::npos);
}

TEST_CASE("empty analysis still emits a valid document") {
  SparseHistogram hist;
  AnalysisConfig config;
  AnalysisResult empty;
  RunMetadata meta;
  auto bundle = build_bundle(hist, empty, std::move(meta), config);
  auto doc = emit_summary(bundle, SummaryFormat::kJson);
  CHECK(doc.find("\"pairs\": []") != std::string::npos);
  CHECK(doc.find("\"metro_summaries\": []") != std::string::npos);
  CHECK(emit_pairs_csv({}).find("metro,client_asn") == 0);
}

TEST_CASE("pairs csv has one row per pair") {
  auto hist = sample_histogram();
  AnalysisConfig config;
  auto bundle = sample_bundle(hist, config);
  auto csv = emit_pairs_csv(bundle.analysis.pairs);
  size_t rows = std::count(csv.begin(), csv.end(), '\n');
  CHECK(rows == bundle.analysis.pairs.size() + 1);  // header included
}

TEST_CASE("bar chart sorts metros by pain and annotates the worst pair") {
  std::vector<MetroSummary> summaries;
  double pains[] = {0.4, 2.5, 1.1};
  const char* metros[] = {"aaa", "bbb", "ccc"};
  for (int i = 0; i < 3; ++i) {
    MetroSummary s;
    s.metro = metros[i];
    PairResult pr;
    pr.metro = metros[i];
    pr.client_asn = 100;
    pr.server_a = std::string(metros[i]) + "01";
    pr.server_b = std::string(metros[i]) + "02";
    pr.metric = kDownloadMbps;
    pr.stat.ks_distance = pains[i] / 10.0;
    pr.pain = pains[i];
    s.worst_by_metric[kDownloadMbps] = pr;
    summaries.push_back(s);
  }
  auto svg = render_bars(summaries, kDownloadMbps, PainMode::kKs);
  // Descending order: bbb before ccc before aaa.
  CHECK(svg.find(">bbb<") < svg.find(">ccc<"));
  CHECK(svg.find(">ccc<") < svg.find(">aaa<"));
  CHECK(svg.find("AS100 bbb01|bbb02") != std::string::npos);
  CHECK(svg.rfind("<svg", 0) == 0);
}

TEST_CASE("svg plot renders one polyline per series") {
  auto hist = sample_histogram();
  auto doc = build_plot_document(hist, "gru", 28573, kDownloadMbps, 100);
  auto svg = emit_plot_svg(doc);
  size_t count = 0, pos = 0;
  while ((pos = svg.find("<polyline", pos)) != std::string::npos) {
    ++count;
    ++pos;
  }
  CHECK(count == 3);
}

TEST_CASE("fnv1a64 is stable") {
  const char* data = "metrodiff";
  CHECK(fnv1a64(data, 9) == fnv1a64(data, 9));
  CHECK(fnv1a64(data, 9) != fnv1a64(data, 8));
}
