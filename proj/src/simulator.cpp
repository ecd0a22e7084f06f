#include "metrodiff/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metrodiff/time_util.hpp"

namespace metrodiff {
namespace {

using nlohmann::json;

constexpr uint64_t kArrivalStream = 0xA221;

double require_positive(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number())
    throw std::invalid_argument(std::string("scenario: missing numeric key '") +
                                key + "'");
  double v = doc[key].get<double>();
  if (!(v > 0.0))
    throw std::invalid_argument(std::string("scenario: '") + key +
                                "' must be positive");
  return v;
}

double number_or(const json& doc, const char* key, double fallback) {
  if (!doc.contains(key)) return fallback;
  if (!doc[key].is_number())
    throw std::invalid_argument(std::string("scenario: '") + key +
                                "' must be a number");
  return doc[key].get<double>();
}

json effect_json(const PathEffect& e) {
  json out;
  if (e.policer_mbps) {
    out["type"] = "per_flow_policer";
    out["policer_mbps"] = *e.policer_mbps;
  } else if (e.shared) {
    out["type"] = "shared_congestion";
    out["capacity_mbps"] = e.shared->capacity_mbps;
    out["load_factor"] = e.shared->load_factor;
  }
  if (e.extra_rtt_ms) {
    if (!out.contains("type")) out["type"] = "hairpin";
    out["extra_rtt_ms"] = *e.extra_rtt_ms;
  }
  return out;
}

}  // namespace

double ArrivalProcess::rate_at(double t_hours) const {
  return mean_tests_per_hour *
         (1.0 + diurnal_amplitude *
                    std::cos(2.0 * std::numbers::pi * (t_hours - peak_hour) /
                             24.0));
}

std::string PathEffect::describe() const {
  std::ostringstream out;
  bool first = true;
  auto sep = [&] {
    if (!first) out << "+";
    first = false;
  };
  if (policer_mbps) {
    sep();
    out << "policer(" << *policer_mbps << ")";
  }
  if (shared) {
    sep();
    out << "shared(" << shared->capacity_mbps << "," << shared->load_factor
        << ")";
  }
  if (extra_rtt_ms) {
    sep();
    out << "hairpin(+" << *extra_rtt_ms << "ms)";
  }
  if (first) out << "clean";
  return out.str();
}

void Scenario::validate() const {
  if (metro.empty()) throw std::invalid_argument("scenario: metro is empty");
  if (servers.empty())
    throw std::invalid_argument("scenario: needs at least one server");
  if (!(duration_hours >= 0.0))
    throw std::invalid_argument("scenario: duration_hours must be >= 0");
  std::set<std::string> server_ids;
  for (const auto& s : servers) {
    if (s.id.rfind(metro, 0) != 0)
      throw std::invalid_argument("scenario: server '" + s.id +
                                  "' does not begin with metro '" + metro + "'");
    if (s.asn < 1) throw std::invalid_argument("scenario: server asn invalid");
    if (!(s.propagation_delay_ms > 0.0))
      throw std::invalid_argument("scenario: propagation_delay_ms must be > 0");
    if (!server_ids.insert(s.id).second)
      throw std::invalid_argument("scenario: duplicate server '" + s.id + "'");
  }
  std::set<uint32_t> asns;
  for (const auto& isp : isps) {
    if (isp.client_asn < 1)
      throw std::invalid_argument("scenario: client_asn invalid");
    if (!asns.insert(isp.client_asn).second)
      throw std::invalid_argument("scenario: duplicate ISP ASN " +
                                  std::to_string(isp.client_asn));
    if (isp.tiers.empty())
      throw std::invalid_argument("scenario: ISP needs at least one tier");
    for (const auto& tier : isp.tiers) {
      if (!(tier.rate_mbps > 0.0) || !(tier.weight > 0.0) ||
          !(tier.sigma_log10 >= 0.0))
        throw std::invalid_argument("scenario: invalid tier parameters");
    }
    if (!(isp.local_bottleneck.median > 0.0) || !(isp.base_rtt_ms.median > 0.0))
      throw std::invalid_argument("scenario: medians must be positive");
    if (!(isp.peak_degradation > 0.0 && isp.peak_degradation <= 1.0))
      throw std::invalid_argument("scenario: peak_degradation must be in (0,1]");
    if (!(isp.arrival.mean_tests_per_hour > 0.0))
      throw std::invalid_argument("scenario: mean_tests_per_hour must be > 0");
    if (!(isp.arrival.diurnal_amplitude >= 0.0 &&
          isp.arrival.diurnal_amplitude < 1.0))
      throw std::invalid_argument(
          "scenario: diurnal_amplitude must be in [0,1)");
  }
  for (const auto& [key, effect] : paths) {
    if (!asns.count(key.first))
      throw std::invalid_argument("scenario: path references unknown ASN " +
                                  std::to_string(key.first));
    if (!server_ids.count(key.second))
      throw std::invalid_argument("scenario: path references unknown server '" +
                                  key.second + "'");
    if (effect.policer_mbps && effect.shared)
      throw std::invalid_argument(
          "scenario: a path cannot have both policer and shared congestion");
    if (effect.policer_mbps && !(*effect.policer_mbps > 0.0))
      throw std::invalid_argument("scenario: policer_mbps must be > 0");
    if (effect.shared &&
        (!(effect.shared->capacity_mbps > 0.0) ||
         !(effect.shared->load_factor > 0.0)))
      throw std::invalid_argument("scenario: shared congestion parameters "
                                  "must be > 0");
    if (effect.extra_rtt_ms && !(*effect.extra_rtt_ms > 0.0))
      throw std::invalid_argument("scenario: extra_rtt_ms must be > 0");
  }
}

Scenario Scenario::from_json(std::istream& in) {
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded())
    throw std::invalid_argument("scenario: file is not valid JSON");
  Scenario sc;
  if (!doc.contains("metro") || !doc["metro"].is_string())
    throw std::invalid_argument("scenario: missing string key 'metro'");
  sc.metro = doc["metro"].get<std::string>();
  sc.seed = doc.value("seed", 0ull);
  sc.duration_hours = number_or(doc, "duration_hours", 0.0);
  if (doc.contains("start_time")) {
    if (doc["start_time"].is_string()) {
      auto t = parse_iso8601_utc(doc["start_time"].get<std::string>());
      if (!t) throw std::invalid_argument("scenario: bad start_time");
      sc.start_time = *t;
    } else if (doc["start_time"].is_number_integer()) {
      sc.start_time = doc["start_time"].get<int64_t>();
    } else {
      throw std::invalid_argument("scenario: bad start_time");
    }
  }
  if (!doc.contains("servers") || !doc["servers"].is_array())
    throw std::invalid_argument("scenario: missing array key 'servers'");
  for (const auto& s : doc["servers"]) {
    ServerSpec spec;
    if (!s.contains("id") || !s["id"].is_string())
      throw std::invalid_argument("scenario: server missing 'id'");
    spec.id = s["id"].get<std::string>();
    spec.asn = static_cast<uint32_t>(require_positive(s, "asn"));
    spec.propagation_delay_ms = number_or(s, "propagation_delay_ms", 1.0);
    sc.servers.push_back(std::move(spec));
  }
  if (!doc.contains("isps") || !doc["isps"].is_array())
    throw std::invalid_argument("scenario: missing array key 'isps'");
  for (const auto& i : doc["isps"]) {
    IspProfile isp;
    isp.client_asn = static_cast<uint32_t>(require_positive(i, "client_asn"));
    if (!i.contains("tiers") || !i["tiers"].is_array())
      throw std::invalid_argument("scenario: ISP missing array key 'tiers'");
    for (const auto& t : i["tiers"]) {
      TierSpec tier;
      tier.rate_mbps = require_positive(t, "rate_mbps");
      tier.weight = require_positive(t, "weight");
      tier.sigma_log10 = number_or(t, "sigma_log10", 0.05);
      isp.tiers.push_back(tier);
    }
    if (i.contains("local_bottleneck")) {
      isp.local_bottleneck.median =
          require_positive(i["local_bottleneck"], "median_mbps");
      isp.local_bottleneck.sigma_log10 =
          number_or(i["local_bottleneck"], "sigma_log10", 0.0);
    }
    if (i.contains("base_rtt_ms")) {
      isp.base_rtt_ms.median = require_positive(i["base_rtt_ms"], "median_ms");
      isp.base_rtt_ms.sigma_log10 =
          number_or(i["base_rtt_ms"], "sigma_log10", 0.05);
    }
    isp.peak_degradation = number_or(i, "peak_degradation", 1.0);
    if (!i.contains("arrival"))
      throw std::invalid_argument("scenario: ISP missing key 'arrival'");
    const auto& a = i["arrival"];
    isp.arrival.mean_tests_per_hour =
        require_positive(a, "mean_tests_per_hour");
    isp.arrival.diurnal_amplitude = number_or(a, "diurnal_amplitude", 0.0);
    isp.arrival.peak_hour = number_or(a, "peak_hour", 21.0);
    sc.isps.push_back(std::move(isp));
  }
  if (doc.contains("paths")) {
    if (!doc["paths"].is_array())
      throw std::invalid_argument("scenario: 'paths' must be an array");
    for (const auto& p : doc["paths"]) {
      uint32_t asn = static_cast<uint32_t>(require_positive(p, "client_asn"));
      if (!p.contains("server_id") || !p["server_id"].is_string())
        throw std::invalid_argument("scenario: path missing 'server_id'");
      std::string server = p["server_id"].get<std::string>();
      PathEffect effect;
      if (p.contains("policer_mbps"))
        effect.policer_mbps = require_positive(p, "policer_mbps");
      if (p.contains("shared")) {
        SharedCongestionSpec shared;
        shared.capacity_mbps = require_positive(p["shared"], "capacity_mbps");
        shared.load_factor = number_or(p["shared"], "load_factor", 1.0);
        effect.shared = shared;
      }
      if (p.contains("extra_rtt_ms"))
        effect.extra_rtt_ms = require_positive(p, "extra_rtt_ms");
      sc.paths[{asn, server}] = effect;
    }
  }
  sc.validate();
  return sc;
}

Scenario Scenario::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  return from_json(in);
}

void GroundTruth::save_json(std::ostream& out) const {
  json doc;
  doc["metro"] = metro;
  doc["effects"] = json::array();
  for (const auto& e : entries) {
    json item;
    item["client_asn"] = e.client_asn;
    item["server_id"] = e.server_id;
    item["effect"] = effect_json(e.effect);
    item["label"] = e.effect.describe();
    doc["effects"].push_back(item);
  }
  out << doc.dump(2) << "\n";
}

double peak_factor(const IspProfile& isp, double t_hours) {
  const double phase = std::cos(2.0 * std::numbers::pi *
                                (t_hours - isp.arrival.peak_hour) / 24.0);
  return 1.0 - (1.0 - isp.peak_degradation) * std::max(0.0, phase);
}

double sample_local_rate(const IspProfile& isp, double t_hours, Rng& rng) {
  double total_weight = 0.0;
  for (const auto& tier : isp.tiers) total_weight += tier.weight;
  double pick = rng.uniform() * total_weight;
  const TierSpec* chosen = &isp.tiers.back();
  for (const auto& tier : isp.tiers) {
    if (pick < tier.weight) {
      chosen = &tier;
      break;
    }
    pick -= tier.weight;
  }
  const double tier_rate = rng.lognormal10(chosen->rate_mbps, chosen->sigma_log10);
  const double bottleneck = rng.lognormal10(isp.local_bottleneck.median,
                                            isp.local_bottleneck.sigma_log10);
  return std::min(tier_rate, bottleneck) * peak_factor(isp, t_hours);
}

double apply_throughput_effect(const PathEffect& effect, double local_rate,
                               Rng& rng) {
  if (effect.policer_mbps) return std::min(local_rate, *effect.policer_mbps);
  if (effect.shared) {
    // Per-test share of aggregate capacity: unit-mean exponential scaled
    // by 1/load_factor, clamped to (0,1]. Exponential is never zero.
    const double share =
        std::min(1.0, rng.exponential() / effect.shared->load_factor);
    return std::min(local_rate, effect.shared->capacity_mbps * share);
  }
  return local_rate;
}

MeasurementRecord sample_measurement(const Scenario& scenario,
                                     const IspProfile& isp, double t_hours,
                                     Rng& rng) {
  // Server choice is uniform and independent of every path parameter.
  const ServerSpec& server =
      scenario.servers[rng.below(scenario.servers.size())];
  PathEffect effect;  // clean by default
  auto it = scenario.paths.find({isp.client_asn, server.id});
  if (it != scenario.paths.end()) effect = it->second;

  const double local_rate = sample_local_rate(isp, t_hours, rng);
  const double download = apply_throughput_effect(effect, local_rate, rng);
  double rtt = rng.lognormal10(isp.base_rtt_ms.median,
                               isp.base_rtt_ms.sigma_log10) +
               server.propagation_delay_ms;
  if (effect.extra_rtt_ms) rtt += *effect.extra_rtt_ms;

  MeasurementRecord record;
  record.timestamp =
      scenario.start_time + static_cast<int64_t>(std::floor(t_hours * 3600.0));
  record.metro = scenario.metro;
  record.server_id = server.id;
  record.server_asn = server.asn;
  record.client_asn = isp.client_asn;
  record.metrics[kDownloadMbps] = download;
  record.metrics[kMinRttMs] = rtt;
  return record;
}

SimulationOutput run_scenario(const Scenario& scenario) {
  scenario.validate();
  SimulationOutput out;
  out.truth.metro = scenario.metro;
  for (const auto& [key, effect] : scenario.paths) {
    if (!effect.is_clean())
      out.truth.entries.push_back({key.first, key.second, effect});
  }

  struct Tagged {
    MeasurementRecord record;
    uint64_t seq;
  };
  std::vector<Tagged> tagged;
  for (const auto& isp : scenario.isps) {
    // Sinusoidal-rate Poisson arrivals via thinning at the peak rate.
    Rng arrival_rng(derive_seed(scenario.seed, isp.client_asn, kArrivalStream));
    const double lambda_max =
        isp.arrival.mean_tests_per_hour * (1.0 + isp.arrival.diurnal_amplitude);
    double t = 0.0;
    uint64_t index = 0;
    while (true) {
      t += arrival_rng.exponential() / lambda_max;
      if (t >= scenario.duration_hours) break;
      if (arrival_rng.uniform() * lambda_max > isp.arrival.rate_at(t)) continue;
      // One derived stream per (ISP, arrival index).
      Rng test_rng(derive_seed(scenario.seed, isp.client_asn, index + 1));
      tagged.push_back(
          {sample_measurement(scenario, isp, t, test_rng), index});
      ++index;
    }
  }
  std::sort(tagged.begin(), tagged.end(), [](const Tagged& a, const Tagged& b) {
    return std::tie(a.record.timestamp, a.record.client_asn, a.seq) <
           std::tie(b.record.timestamp, b.record.client_asn, b.seq);
  });
  out.records.reserve(tagged.size());
  for (auto& item : tagged) out.records.push_back(std::move(item.record));
  std::sort(out.truth.entries.begin(), out.truth.entries.end(),
            [](const GroundTruthEntry& a, const GroundTruthEntry& b) {
              return std::tie(a.client_asn, a.server_id) <
                     std::tie(b.client_asn, b.server_id);
            });
  return out;
}

}  // namespace metrodiff
