#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "metrodiff/histogram.hpp"
#include "metrodiff/stats.hpp"

namespace metrodiff {

struct AnalysisConfig {
  int top_n_isps = 5;
  uint64_t min_samples_per_cell = 100;
  std::vector<std::string> metrics = {kDownloadMbps, kMinRttMs};
  double calibration_ks_threshold = 0.05;
  std::map<std::string, PainMode> pain_mode;  // default kKs per metric

  PainMode pain_mode_for(const std::string& metric) const;
  void validate() const;
};

// One (metro, ISP, server pair, metric) comparison. server_a < server_b.
struct PairResult {
  std::string metro;
  uint32_t client_asn = 0;
  std::string server_a;
  std::string server_b;
  std::string metric;
  DifferenceStat stat;
  double pain = 0.0;
};

// A cell that fell below the minimum-sample gate.
struct SkippedCell {
  std::string metro;
  uint32_t client_asn = 0;
  std::string server_id;
  std::string metric;
  uint64_t samples = 0;
};

enum class CalibrationFlag { kCalibrated, kSuspect, kInsufficientData };

const char* calibration_flag_name(CalibrationFlag flag);

struct ServerCalibration {
  std::string metro;
  std::string server_id;
  CalibrationFlag flag = CalibrationFlag::kInsufficientData;
  double best_ks = -1.0;  // smallest KS over the server's eligible pairs
};

struct MetroSummary {
  std::string metro;
  int server_count = 0;
  int eligible_isp_count = 0;
  // Per metric: the PairResult with the largest pain.
  std::map<std::string, PairResult> worst_by_metric;
};

struct AnalysisResult {
  std::vector<PairResult> pairs;
  std::vector<SkippedCell> skipped;
  std::vector<MetroSummary> summaries;
  std::vector<ServerCalibration> calibration;
  std::map<std::string, std::vector<uint32_t>> top_isps_by_metro;
};

// ISPs ordered by total test count in the metro, descending; ties broken
// by ascending ASN. At most n entries.
std::vector<uint32_t> top_isps(const SparseHistogram& hist,
                               const std::string& metro, int n);

// For each metro, top-N ISP, metric, and unordered server pair where both
// cells pass the sample gate, exactly one PairResult. Gated-out cells are
// reported in `skipped`.
std::vector<PairResult> pairwise_diffs(const SparseHistogram& hist,
                                       const AnalysisConfig& config,
                                       std::vector<SkippedCell>* skipped);

// One summary per metro with >= 2 servers present in `results`.
std::vector<MetroSummary> metro_summaries(const std::vector<PairResult>& results,
                                          const AnalysisConfig& config);

// A server is CALIBRATED when it appears in at least one download-throughput
// pair with KS at or below the threshold, SUSPECT when all its pairs exceed
// it, INSUFFICIENT_DATA when it has no eligible pairs.
std::vector<ServerCalibration> calibration_check(
    const std::vector<PairResult>& results, const SparseHistogram& hist,
    const AnalysisConfig& config);

AnalysisResult run_analysis(const SparseHistogram& hist,
                            const AnalysisConfig& config);

}  // namespace metrodiff
