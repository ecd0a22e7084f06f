#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "metrodiff/analysis.hpp"
#include "metrodiff/histogram.hpp"
#include "metrodiff/ingest.hpp"

namespace metrodiff {

// One curve of a per-ISP distribution plot: a single server's binned
// distribution as density and cumulative fractions over bin centers.
struct PlotSeries {
  std::string label;  // "AS<asn> <server> (n=<total>)"
  std::string server_id;
  uint64_t total = 0;
  std::vector<double> bin_centers;
  std::vector<double> density;     // sums to 1
  std::vector<double> cumulative;  // running sum of density
};

struct PlotDocument {
  std::string metro;
  uint32_t client_asn = 0;
  std::string metric;
  std::vector<PlotSeries> series;
  std::vector<SkippedCell> footnote;  // servers below the sample gate
  std::string note;                   // set when the key is unknown
};

struct RunMetadata {
  std::string tool_version;
  std::string input_digest;  // 64-bit FNV-1a of input bytes, hex
  int64_t data_start = 0;    // min / max record timestamp, not wall clock,
  int64_t data_end = 0;      // so identical inputs give identical reports
  std::string config_json;   // effective configuration echo
  IngestStats ingest;
};

struct ReportBundle {
  RunMetadata meta;
  AnalysisResult analysis;
  std::vector<PlotDocument> plots;  // one per (metro, ISP, metric)
};

ReportBundle build_bundle(const SparseHistogram& hist,
                          const AnalysisResult& analysis, RunMetadata meta,
                          const AnalysisConfig& config);

PlotDocument build_plot_document(const SparseHistogram& hist,
                                 const std::string& metro, uint32_t client_asn,
                                 const std::string& metric,
                                 uint64_t min_samples);

enum class SummaryFormat { kJson, kDelimited };

// Stable field ordering; identical bundles serialize to identical bytes.
std::string emit_summary(const ReportBundle& bundle, SummaryFormat format);

std::string emit_pairs_csv(const std::vector<PairResult>& pairs);
std::string emit_plot_json(const PlotDocument& doc);
std::string emit_plot_svg(const PlotDocument& doc);

// Bar chart: one bar per metro, height = worst pain for (metric, mode),
// sorted descending, annotated with the worst pair's ISP and servers.
std::string render_bars(const std::vector<MetroSummary>& summaries,
                        const std::string& metric, PainMode mode);

// Writes the full tree:
//   <out>/summary.json
//   <out>/pairs.csv
//   <out>/metro/<metro>/<asn>/<metric>.json + .svg
//   <out>/bars_<metric>_<mode>.svg
void write_report_tree(const std::string& out_dir, const ReportBundle& bundle,
                       const AnalysisConfig& config);

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed = 14695981039346656037ull);
std::string fnv1a64_file_hex(const std::string& path);

}  // namespace metrodiff
