#include "metrodiff/analysis.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace metrodiff {

PainMode AnalysisConfig::pain_mode_for(const std::string& metric) const {
  auto it = pain_mode.find(metric);
  return it == pain_mode.end() ? PainMode::kKs : it->second;
}

void AnalysisConfig::validate() const {
  if (top_n_isps < 1) throw std::invalid_argument("top_n_isps must be >= 1");
  if (min_samples_per_cell < 1)
    throw std::invalid_argument("min_samples_per_cell must be >= 1");
  if (metrics.empty()) throw std::invalid_argument("metrics must be non-empty");
  if (!(calibration_ks_threshold > 0.0 && calibration_ks_threshold < 1.0))
    throw std::invalid_argument("calibration_ks_threshold must be in (0,1)");
}

const char* calibration_flag_name(CalibrationFlag flag) {
  switch (flag) {
    case CalibrationFlag::kCalibrated: return "CALIBRATED";
    case CalibrationFlag::kSuspect: return "SUSPECT";
    case CalibrationFlag::kInsufficientData: return "INSUFFICIENT_DATA";
  }
  return "UNKNOWN";
}

std::vector<uint32_t> top_isps(const SparseHistogram& hist,
                               const std::string& metro, int n) {
  std::vector<std::pair<uint64_t, uint32_t>> ranked;
  for (uint32_t asn : hist.isps_in_metro(metro))
    ranked.emplace_back(hist.isp_total(metro, asn), asn);
  // Largest count first; equal counts break by ascending ASN.
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  std::vector<uint32_t> out;
  for (const auto& [count, asn] : ranked) {
    if (static_cast<int>(out.size()) >= n) break;
    out.push_back(asn);
  }
  return out;
}

std::vector<PairResult> pairwise_diffs(const SparseHistogram& hist,
                                       const AnalysisConfig& config,
                                       std::vector<SkippedCell>* skipped) {
  config.validate();
  std::vector<PairResult> results;
  for (const std::string& metro : hist.metros()) {
    const auto server_set = hist.servers_in_metro(metro);
    std::vector<std::string> servers(server_set.begin(), server_set.end());
    for (uint32_t asn : top_isps(hist, metro, config.top_n_isps)) {
      for (const std::string& metric : config.metrics) {
        std::vector<std::string> eligible;
        for (const auto& server : servers) {
          CellKey key{metro, server, asn, metric};
          uint64_t total = hist.cell_total(key);
          if (total >= config.min_samples_per_cell) {
            eligible.push_back(server);
          } else if (skipped) {
            skipped->push_back({metro, asn, server, metric, total});
          }
        }
        for (size_t i = 0; i < eligible.size(); ++i) {
          for (size_t j = i + 1; j < eligible.size(); ++j) {
            auto a = BinnedDistribution::from_cell(
                hist, {metro, eligible[i], asn, metric});
            auto b = BinnedDistribution::from_cell(
                hist, {metro, eligible[j], asn, metric});
            PairResult pr;
            pr.metro = metro;
            pr.client_asn = asn;
            pr.server_a = eligible[i];
            pr.server_b = eligible[j];
            pr.metric = metric;
            pr.stat = difference_stat(a, b);
            pr.pain = pain_score(pr.stat, config.pain_mode_for(metric));
            results.push_back(std::move(pr));
          }
        }
      }
    }
  }
  // Normalized ordering so parallel or reordered evaluation cannot change
  // the report.
  std::sort(results.begin(), results.end(),
            [](const PairResult& a, const PairResult& b) {
              return std::tie(a.metro, a.client_asn, a.metric, a.server_a,
                              a.server_b) < std::tie(b.metro, b.client_asn,
                                                     b.metric, b.server_a,
                                                     b.server_b);
            });
  return results;
}

std::vector<MetroSummary> metro_summaries(const std::vector<PairResult>& results,
                                          const AnalysisConfig& config) {
  std::map<std::string, MetroSummary> by_metro;
  std::map<std::string, std::set<std::string>> servers;
  std::map<std::string, std::set<uint32_t>> isps;
  for (const auto& pr : results) {
    servers[pr.metro].insert(pr.server_a);
    servers[pr.metro].insert(pr.server_b);
    isps[pr.metro].insert(pr.client_asn);
    MetroSummary& summary = by_metro[pr.metro];
    summary.metro = pr.metro;
    auto it = summary.worst_by_metric.find(pr.metric);
    if (it == summary.worst_by_metric.end()) {
      summary.worst_by_metric[pr.metric] = pr;
    } else {
      const PairResult& cur = it->second;
      auto key = [](const PairResult& p) {
        return std::tie(p.client_asn, p.server_a, p.server_b);
      };
      if (pr.pain > cur.pain || (pr.pain == cur.pain && key(pr) < key(cur)))
        it->second = pr;
    }
  }
  std::vector<MetroSummary> out;
  for (auto& [metro, summary] : by_metro) {
    summary.server_count = static_cast<int>(servers[metro].size());
    summary.eligible_isp_count = static_cast<int>(isps[metro].size());
    if (summary.server_count >= 2) out.push_back(std::move(summary));
  }
  return out;
}

std::vector<ServerCalibration> calibration_check(
    const std::vector<PairResult>& results, const SparseHistogram& hist,
    const AnalysisConfig& config) {
  // Calibration looks only at download throughput pairs.
  std::map<std::pair<std::string, std::string>, double> best_ks;
  for (const auto& pr : results) {
    if (pr.metric != kDownloadMbps) continue;
    for (const std::string& server : {pr.server_a, pr.server_b}) {
      auto key = std::make_pair(pr.metro, server);
      auto it = best_ks.find(key);
      if (it == best_ks.end() || pr.stat.ks_distance < it->second)
        best_ks[key] = pr.stat.ks_distance;
    }
  }
  std::vector<ServerCalibration> out;
  for (const std::string& metro : hist.metros()) {
    for (const std::string& server : hist.servers_in_metro(metro)) {
      ServerCalibration cal;
      cal.metro = metro;
      cal.server_id = server;
      auto it = best_ks.find({metro, server});
      if (it == best_ks.end()) {
        cal.flag = CalibrationFlag::kInsufficientData;
      } else {
        cal.best_ks = it->second;
        cal.flag = it->second <= config.calibration_ks_threshold
                       ? CalibrationFlag::kCalibrated
                       : CalibrationFlag::kSuspect;
      }
      out.push_back(std::move(cal));
    }
  }
  return out;
}

AnalysisResult run_analysis(const SparseHistogram& hist,
                            const AnalysisConfig& config) {
  AnalysisResult result;
  result.pairs = pairwise_diffs(hist, config, &result.skipped);
  result.summaries = metro_summaries(result.pairs, config);
  result.calibration = calibration_check(result.pairs, hist, config);
  for (const std::string& metro : hist.metros())
    result.top_isps_by_metro[metro] =
        top_isps(hist, metro, config.top_n_isps);
  return result;
}

}  // namespace metrodiff
