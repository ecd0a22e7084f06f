#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace metrodiff {

// Canonical metric names. Values are Mbit/s, milliseconds, or a
// dimensionless fraction for loss_rate. Units are fixed at ingest.
inline constexpr const char* kDownloadMbps = "download_mbps";
inline constexpr const char* kMinRttMs = "min_rtt_ms";
inline constexpr const char* kUploadMbps = "upload_mbps";
inline constexpr const char* kLossRate = "loss_rate";

// One measurement: a single client test against a single server.
struct MeasurementRecord {
  int64_t timestamp = 0;  // UTC seconds since epoch
  std::string metro;
  std::string server_id;
  uint32_t server_asn = 0;
  uint32_t client_asn = 0;
  std::map<std::string, double> metrics;

  bool operator==(const MeasurementRecord&) const = default;
};

bool is_known_metric(const std::string& name);

// loss_rate is a fraction in [0,1]; every other metric is strictly positive.
bool metric_value_valid(const std::string& name, double value);

}  // namespace metrodiff
