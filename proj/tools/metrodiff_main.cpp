// metrodiff: A/B comparison of per-ISP measurement distributions across
// the servers of a metro, plus a seeded scenario simulator for validation.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metrodiff/analysis.hpp"
#include "metrodiff/histogram.hpp"
#include "metrodiff/ingest.hpp"
#include "metrodiff/report.hpp"
#include "metrodiff/simulator.hpp"
#include "metrodiff/stats.hpp"
#include "metrodiff/time_util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct RunConfig {
  std::string input;
  std::string format = "csv";
  std::string from_time;
  std::string to_time;
  std::vector<std::string> metros;
  int bins_per_decade = 30;
  int top_isps = 5;
  uint64_t min_samples = 100;
  std::vector<std::string> pain_modes;  // "ks", "spread", or "metric=mode"
  double calibration_ks = 0.05;
  std::vector<std::string> metrics = {metrodiff::kDownloadMbps,
                                      metrodiff::kMinRttMs};
  std::string out;
  uint64_t seed = 1;
  bool show_config = false;
};

// config-file values override defaults; CLI flags override both.
void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    throw std::invalid_argument("config file is not a JSON object: " + path);
  for (const auto& [key, value] : doc.items()) {
    if (key == "input") cfg.input = value.get<std::string>();
    else if (key == "format") cfg.format = value.get<std::string>();
    else if (key == "from") cfg.from_time = value.get<std::string>();
    else if (key == "to") cfg.to_time = value.get<std::string>();
    else if (key == "metros") cfg.metros = value.get<std::vector<std::string>>();
    else if (key == "bins_per_decade") cfg.bins_per_decade = value.get<int>();
    else if (key == "top_isps") cfg.top_isps = value.get<int>();
    else if (key == "min_samples") cfg.min_samples = value.get<uint64_t>();
    else if (key == "pain_mode")
      cfg.pain_modes = value.is_array()
                           ? value.get<std::vector<std::string>>()
                           : std::vector<std::string>{value.get<std::string>()};
    else if (key == "calibration_ks_threshold")
      cfg.calibration_ks = value.get<double>();
    else if (key == "metrics")
      cfg.metrics = value.get<std::vector<std::string>>();
    else if (key == "out") cfg.out = value.get<std::string>();
    else if (key == "seed") cfg.seed = value.get<uint64_t>();
    else
      throw std::invalid_argument("config file: unknown key '" + key + "'");
  }
}

metrodiff::InputFormat parse_format(const RunConfig& cfg) {
  auto format = metrodiff::parse_format_name(cfg.format);
  if (!format)
    throw std::invalid_argument("unknown input format '" + cfg.format +
                                "' (expected csv or jsonl)");
  return *format;
}

metrodiff::IngestFilter build_filter(const RunConfig& cfg) {
  metrodiff::IngestFilter filter;
  if (!cfg.from_time.empty()) {
    auto t = metrodiff::parse_iso8601_utc(cfg.from_time);
    if (!t) throw std::invalid_argument("bad --from timestamp: " + cfg.from_time);
    filter.time_from = *t;
  }
  if (!cfg.to_time.empty()) {
    auto t = metrodiff::parse_iso8601_utc(cfg.to_time);
    if (!t) throw std::invalid_argument("bad --to timestamp: " + cfg.to_time);
    filter.time_to = *t;
  }
  filter.metros.insert(cfg.metros.begin(), cfg.metros.end());
  filter.validate();
  return filter;
}

metrodiff::AnalysisConfig build_analysis_config(const RunConfig& cfg) {
  metrodiff::AnalysisConfig out;
  out.top_n_isps = cfg.top_isps;
  out.min_samples_per_cell = cfg.min_samples;
  out.metrics = cfg.metrics;
  out.calibration_ks_threshold = cfg.calibration_ks;
  for (const std::string& spec : cfg.pain_modes) {
    auto parse_mode = [](const std::string& name) {
      if (name == "ks") return metrodiff::PainMode::kKs;
      if (name == "spread") return metrodiff::PainMode::kSpread;
      throw std::invalid_argument("unknown pain mode '" + name + "'");
    };
    auto eq = spec.find('=');
    if (eq == std::string::npos) {
      for (const auto& metric : out.metrics)
        out.pain_mode[metric] = parse_mode(spec);
    } else {
      out.pain_mode[spec.substr(0, eq)] = parse_mode(spec.substr(eq + 1));
    }
  }
  out.validate();
  return out;
}

std::string effective_config_json(const RunConfig& cfg) {
  ordered_json doc;
  doc["input"] = cfg.input;
  doc["format"] = cfg.format;
  doc["from"] = cfg.from_time;
  doc["to"] = cfg.to_time;
  doc["metros"] = cfg.metros;
  doc["bins_per_decade"] = cfg.bins_per_decade;
  doc["top_isps"] = cfg.top_isps;
  doc["min_samples"] = cfg.min_samples;
  doc["pain_mode"] = cfg.pain_modes;
  doc["calibration_ks_threshold"] = cfg.calibration_ks;
  doc["metrics"] = cfg.metrics;
  doc["out"] = cfg.out;
  doc["seed"] = cfg.seed;
  return doc.dump(2);
}

metrodiff::BinningScheme build_scheme(const RunConfig& cfg) {
  metrodiff::BinningScheme scheme;
  scheme.bins_per_decade = cfg.bins_per_decade;
  if (scheme.bins_per_decade < 5)
    throw std::invalid_argument("--bins-per-decade must be >= 5");
  scheme.validate();
  return scheme;
}

struct IngestOutcome {
  metrodiff::SparseHistogram hist;
  metrodiff::IngestStats stats;
  int64_t data_start = 0;
  int64_t data_end = 0;
};

IngestOutcome ingest_to_histogram(const RunConfig& cfg) {
  IngestOutcome out;
  out.hist = metrodiff::SparseHistogram(build_scheme(cfg));
  bool first = true;
  out.stats = metrodiff::ingest_file(
      cfg.input, parse_format(cfg), build_filter(cfg),
      [&](const metrodiff::MeasurementRecord& record) {
        out.hist.insert(record);
        if (first) {
          out.data_start = out.data_end = record.timestamp;
          first = false;
        } else {
          out.data_start = std::min(out.data_start, record.timestamp);
          out.data_end = std::max(out.data_end, record.timestamp);
        }
      });
  return out;
}

int cmd_analyze(const RunConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("analyze requires --input");
  if (cfg.out.empty()) throw std::invalid_argument("analyze requires --out");
  const bool out_existed = fs::exists(cfg.out);
  try {
    auto config = build_analysis_config(cfg);
    auto ingested = ingest_to_histogram(cfg);
    auto analysis = metrodiff::run_analysis(ingested.hist, config);

    metrodiff::RunMetadata meta;
    meta.input_digest = metrodiff::fnv1a64_file_hex(cfg.input);
    meta.data_start = ingested.data_start;
    meta.data_end = ingested.data_end;
    meta.config_json = effective_config_json(cfg);
    meta.ingest = ingested.stats;

    auto bundle = metrodiff::build_bundle(ingested.hist, analysis,
                                          std::move(meta), config);
    metrodiff::write_report_tree(cfg.out, bundle, config);
  } catch (...) {
    if (!out_existed) fs::remove_all(cfg.out);
    throw;
  }
  std::cout << "report written to " << cfg.out << "\n";
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& scenario_path,
                 bool seed_given) {
  auto scenario = metrodiff::Scenario::load_file(scenario_path);
  if (seed_given) scenario.seed = cfg.seed;
  auto output = metrodiff::run_scenario(scenario);

  fs::create_directories(cfg.out);
  const auto format = parse_format(cfg);
  const std::string records_name =
      format == metrodiff::InputFormat::kDelimited ? "records.csv"
                                                   : "records.jsonl";
  {
    std::ofstream out(fs::path(cfg.out) / records_name, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write records to " + cfg.out);
    if (format == metrodiff::InputFormat::kDelimited)
      metrodiff::write_records_delimited(out, output.records);
    else
      metrodiff::write_records_jsonl(out, output.records);
  }
  {
    std::ofstream out(fs::path(cfg.out) / "ground_truth.json", std::ios::binary);
    output.truth.save_json(out);
  }
  std::cout << output.records.size() << " records written to " << cfg.out
            << "/" << records_name << "\n";
  return kExitOk;
}

int cmd_snapshot(const RunConfig& cfg) {
  if (cfg.input.empty()) throw std::invalid_argument("snapshot requires --input");
  if (cfg.out.empty()) throw std::invalid_argument("snapshot requires --out");
  auto ingested = ingest_to_histogram(cfg);
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write snapshot: " + cfg.out);
  ingested.hist.save(out);
  std::cout << "snapshot written to " << cfg.out << " ("
            << ingested.stats.accepted << " records)\n";
  return kExitOk;
}

int cmd_diff_snapshots(const std::string& path_a, const std::string& path_b,
                       const std::string& out_path, uint64_t min_samples) {
  auto load = [](const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open snapshot: " + path);
    return metrodiff::SparseHistogram::load(in);
  };
  auto a = load(path_a);
  auto b = load(path_b);
  if (!(a.default_scheme() == b.default_scheme()) ||
      a.scheme_overrides() != b.scheme_overrides())
    throw std::runtime_error("snapshots use different binning schemes");

  std::ostringstream out;
  out << "metro,server_id,client_asn,metric,ks_distance,spread,spread_folded,"
         "n_a,n_b\n";
  char buf[40];
  auto fmt = [&buf](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (const auto& [key, cell] : a.cells()) {
    uint64_t nb = b.cell_total(key);
    if (cell.total < min_samples || nb < min_samples) continue;
    auto da = metrodiff::BinnedDistribution::from_cell(a, key);
    auto db = metrodiff::BinnedDistribution::from_cell(b, key);
    auto stat = metrodiff::difference_stat(da, db);
    out << key.metro << ',' << key.server_id << ',' << key.client_asn << ','
        << key.metric << ',' << fmt(stat.ks_distance) << ','
        << fmt(stat.spread) << ',' << fmt(stat.spread_folded) << ','
        << stat.n_a << ',' << stat.n_b << "\n";
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << out.str();
  } else {
    std::ofstream file(out_path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + out_path);
    file << out.str();
  }
  return kExitOk;
}

int cmd_plot(const RunConfig& cfg, const std::string& metro, uint32_t asn,
             const std::string& metric) {
  if (cfg.input.empty()) throw std::invalid_argument("plot requires --input");
  if (cfg.out.empty()) throw std::invalid_argument("plot requires --out");
  auto ingested = ingest_to_histogram(cfg);
  auto doc = metrodiff::build_plot_document(ingested.hist, metro, asn, metric,
                                            cfg.min_samples);
  fs::create_directories(cfg.out);
  {
    std::ofstream out(fs::path(cfg.out) / (metric + ".json"), std::ios::binary);
    out << metrodiff::emit_plot_json(doc);
  }
  {
    std::ofstream out(fs::path(cfg.out) / (metric + ".svg"), std::ios::binary);
    out << metrodiff::emit_plot_svg(doc);
  }
  std::cout << "plot written to " << cfg.out << "\n";
  return kExitOk;
}

void add_common_flags(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--input", cfg.input, "input measurement file");
  cmd->add_option("--format", cfg.format, "input format: csv or jsonl");
  cmd->add_option("--from", cfg.from_time, "window start, ISO-8601 UTC");
  cmd->add_option("--to", cfg.to_time, "window end (exclusive), ISO-8601 UTC");
  cmd->add_option("--metro", cfg.metros, "metro allow-list (repeatable)");
  cmd->add_option("--bins-per-decade", cfg.bins_per_decade,
                  "log-bin resolution");
  cmd->add_option("--min-samples", cfg.min_samples,
                  "minimum samples per (server, ISP, metric) cell");
  cmd->add_flag("--show-config", cfg.show_config,
                "print the effective configuration and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mid-path anomaly detection via per-ISP A/B comparison "
               "across metro servers"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path;
  std::string scenario_path;
  std::string snap_a, snap_b;
  std::string plot_metro, plot_metric = metrodiff::kDownloadMbps;
  uint32_t plot_asn = 0;

  app.add_option("--config", config_path, "JSON config file");

  auto* analyze = app.add_subcommand("analyze", "ingest, compare, report");
  add_common_flags(analyze, cfg);
  analyze->add_option("--top-isps", cfg.top_isps, "ISPs per metro");
  analyze->add_option("--pain-mode", cfg.pain_modes,
                      "pain mode: ks, spread, or metric=mode");
  analyze->add_option("--calibration-ks", cfg.calibration_ks,
                      "calibration KS threshold");
  analyze->add_option("--metrics", cfg.metrics, "metrics to analyze");
  analyze->add_option("--out", cfg.out, "report output directory");

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic dataset");
  simulate->add_option("scenario", scenario_path, "scenario JSON file")
      ->required();
  auto* seed_opt =
      simulate->add_option("--seed", cfg.seed, "override the scenario seed");
  simulate->add_option("--format", cfg.format, "output format: csv or jsonl");
  simulate->add_option("--out", cfg.out, "output directory")->required();
  simulate->add_flag("--show-config", cfg.show_config,
                     "print the effective configuration and exit");

  auto* snapshot = app.add_subcommand("snapshot", "save a histogram snapshot");
  add_common_flags(snapshot, cfg);
  snapshot->add_option("--out", cfg.out, "snapshot output file");

  auto* diff = app.add_subcommand("diff-snapshots",
                                  "compare same-cell distributions of two "
                                  "snapshots");
  diff->add_option("a", snap_a, "first snapshot")->required();
  diff->add_option("b", snap_b, "second snapshot")->required();
  diff->add_option("--out", cfg.out, "output CSV (default stdout)");
  diff->add_option("--min-samples", cfg.min_samples,
                   "minimum samples per cell on both sides");

  auto* plot = app.add_subcommand("plot", "emit one (metro, ISP, metric) plot");
  add_common_flags(plot, cfg);
  plot->add_option("--plot-metro", plot_metro, "metro code")->required();
  plot->add_option("--asn", plot_asn, "client ASN")->required();
  plot->add_option("--metric", plot_metric, "metric name");
  plot->add_option("--out", cfg.out, "output directory");

  // Precedence: CLI flag > config file > default. Parse once to learn the
  // config path and flags, layer the file under them, then reparse.
  try {
    app.parse(argc, argv);
    if (!config_path.empty()) {
      RunConfig layered;
      apply_config_file(layered, config_path);
      cfg = layered;
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  try {
    if (cfg.show_config) {
      std::cout << effective_config_json(cfg) << "\n";
      return kExitOk;
    }
    if (*analyze) return cmd_analyze(cfg);
    if (*simulate) return cmd_simulate(cfg, scenario_path, seed_opt->count() > 0);
    if (*snapshot) return cmd_snapshot(cfg);
    if (*diff) return cmd_diff_snapshots(snap_a, snap_b, cfg.out, cfg.min_samples);
    if (*plot) return cmd_plot(cfg, plot_metro, plot_asn, plot_metric);
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
