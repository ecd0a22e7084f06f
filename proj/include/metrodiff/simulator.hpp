#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metrodiff/record.hpp"
#include "metrodiff/rng.hpp"

namespace metrodiff {

struct ServerSpec {
  std::string id;
  uint32_t asn = 0;
  double propagation_delay_ms = 1.0;
};

struct TierSpec {
  double rate_mbps = 0.0;
  double weight = 0.0;
  double sigma_log10 = 0.05;
};

struct LognormalSpec {
  double median = 0.0;
  double sigma_log10 = 0.0;
};

struct ArrivalProcess {
  double mean_tests_per_hour = 0.0;
  double diurnal_amplitude = 0.0;  // in [0, 1)
  double peak_hour = 21.0;

  // lambda(t) = mean * (1 + amplitude * cos(2*pi*(t - peak)/24)), t in hours.
  double rate_at(double t_hours) const;
};

struct IspProfile {
  uint32_t client_asn = 0;
  std::vector<TierSpec> tiers;  // weights normalized on load
  LognormalSpec local_bottleneck{1e4, 0.0};  // Mbit/s cap (WiFi/LAN)
  LognormalSpec base_rtt_ms{20.0, 0.05};
  // Multiplicative throughput factor reached at peak hour; applies to the
  // local subpath only, so it is server-invariant by construction.
  double peak_degradation = 1.0;
  ArrivalProcess arrival;
};

struct SharedCongestionSpec {
  double capacity_mbps = 0.0;
  double load_factor = 1.0;
};

// Mid-path effect on one (client ASN, server) path. Throughput effects
// (policer or shared congestion) and the RTT effect compose.
struct PathEffect {
  std::optional<double> policer_mbps;
  std::optional<SharedCongestionSpec> shared;
  std::optional<double> extra_rtt_ms;

  bool is_clean() const {
    return !policer_mbps && !shared && !extra_rtt_ms;
  }
  std::string describe() const;
};

struct Scenario {
  std::string metro;
  uint64_t seed = 0;
  double duration_hours = 0.0;
  int64_t start_time = 1736121600;  // 2025-01-06T00:00:00Z
  std::vector<ServerSpec> servers;
  std::vector<IspProfile> isps;
  std::map<std::pair<uint32_t, std::string>, PathEffect> paths;

  void validate() const;  // throws std::invalid_argument listing the problem

  static Scenario from_json(std::istream& in);
  static Scenario load_file(const std::string& path);
};

struct GroundTruthEntry {
  uint32_t client_asn = 0;
  std::string server_id;
  PathEffect effect;
};

struct GroundTruth {
  std::string metro;
  std::vector<GroundTruthEntry> entries;  // every non-clean path

  void save_json(std::ostream& out) const;
};

// Local subpath sample: min(tier draw, local bottleneck draw) times the
// diurnal peak factor. Exposed separately so effect sharpness can be
// studied against the unconstrained rate.
double sample_local_rate(const IspProfile& isp, double t_hours, Rng& rng);

double peak_factor(const IspProfile& isp, double t_hours);

double apply_throughput_effect(const PathEffect& effect, double local_rate,
                               Rng& rng);

// One synthetic test at time t for one ISP; the server is drawn uniformly,
// independent of all path parameters.
MeasurementRecord sample_measurement(const Scenario& scenario,
                                     const IspProfile& isp, double t_hours,
                                     Rng& rng);

struct SimulationOutput {
  std::vector<MeasurementRecord> records;  // ordered by timestamp
  GroundTruth truth;
};

// Deterministic for a fixed seed: per-ISP arrival streams and one derived
// RNG stream per (ISP, arrival index).
SimulationOutput run_scenario(const Scenario& scenario);

}  // namespace metrodiff
