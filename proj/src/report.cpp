#include "metrodiff/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metrodiff/time_util.hpp"

namespace metrodiff {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kToolVersion = "0.1.0";
constexpr int kSchemaVersion = 1;

const char* pain_mode_name(PainMode mode) {
  return mode == PainMode::kKs ? "ks" : "spread";
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

ordered_json pair_json(const PairResult& pr) {
  ordered_json j;
  j["metro"] = pr.metro;
  j["client_asn"] = pr.client_asn;
  j["server_a"] = pr.server_a;
  j["server_b"] = pr.server_b;
  j["metric"] = pr.metric;
  j["ks_distance"] = pr.stat.ks_distance;
  j["spread"] = pr.stat.spread;
  j["spread_folded"] = pr.stat.spread_folded;
  j["pain_ks"] = pr.stat.pain_ks;
  j["pain"] = pr.pain;
  j["n_a"] = pr.stat.n_a;
  j["n_b"] = pr.stat.n_b;
  return j;
}

// Palette in the spirit of the usual matplotlib cycle.
const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                         "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

uint64_t fnv1a64(const void* data, size_t len, uint64_t seed) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  uint64_t hash = seed;
  for (size_t i = 0; i < len; ++i) {
    hash ^= bytes[i];
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string fnv1a64_file_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  uint64_t hash = 14695981039346656037ull;
  char buf[65536];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0)
    hash = fnv1a64(buf, static_cast<size_t>(in.gcount()), hash);
  char out[20];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

PlotDocument build_plot_document(const SparseHistogram& hist,
                                 const std::string& metro, uint32_t client_asn,
                                 const std::string& metric,
                                 uint64_t min_samples) {
  PlotDocument doc;
  doc.metro = metro;
  doc.client_asn = client_asn;
  doc.metric = metric;
  bool any = false;
  for (const std::string& server : hist.servers_in_metro(metro)) {
    CellKey key{metro, server, client_asn, metric};
    uint64_t total = hist.cell_total(key);
    if (total == 0) continue;
    any = true;
    if (total < min_samples) {
      doc.footnote.push_back({metro, client_asn, server, metric, total});
      continue;
    }
    auto dist = BinnedDistribution::from_cell(hist, key);
    PlotSeries series;
    series.server_id = server;
    series.total = total;
    series.label = "AS" + std::to_string(client_asn) + " " + server +
                   " (n=" + std::to_string(total) + ")";
    double cumulative = 0.0;
    for (const auto& [bin, count] : dist.entries) {
      const double density =
          static_cast<double>(count) / static_cast<double>(total);
      cumulative += density;
      series.bin_centers.push_back(dist.scheme.center(bin));
      series.density.push_back(density);
      series.cumulative.push_back(cumulative);
    }
    doc.series.push_back(std::move(series));
  }
  if (!any)
    doc.note = "no data for metro=" + metro + " asn=" +
               std::to_string(client_asn) + " metric=" + metric;
  return doc;
}

ReportBundle build_bundle(const SparseHistogram& hist,
                          const AnalysisResult& analysis, RunMetadata meta,
                          const AnalysisConfig& config) {
  ReportBundle bundle;
  bundle.meta = std::move(meta);
  bundle.meta.tool_version = kToolVersion;
  bundle.analysis = analysis;
  for (const auto& [metro, isps] : analysis.top_isps_by_metro) {
    for (uint32_t asn : isps) {
      for (const std::string& metric : config.metrics) {
        bundle.plots.push_back(build_plot_document(
            hist, metro, asn, metric, config.min_samples_per_cell));
      }
    }
  }
  return bundle;
}

std::string emit_summary(const ReportBundle& bundle, SummaryFormat format) {
  if (format == SummaryFormat::kDelimited) {
    std::ostringstream out;
    out << "#metrodiff summary v" << kSchemaVersion << "\n";
    out << "#input_digest=" << bundle.meta.input_digest << "\n";
    out << "metro,metric,worst_pain,worst_client_asn,worst_server_a,"
           "worst_server_b\n";
    for (const auto& s : bundle.analysis.summaries) {
      for (const auto& [metric, pr] : s.worst_by_metric) {
        out << s.metro << ',' << metric << ',' << fmt(pr.pain) << ','
            << pr.client_asn << ',' << pr.server_a << ',' << pr.server_b
            << "\n";
      }
    }
    return out.str();
  }
  ordered_json doc;
  doc["schema_version"] = kSchemaVersion;
  ordered_json meta;
  meta["tool_version"] = bundle.meta.tool_version;
  meta["input_digest"] = bundle.meta.input_digest;
  meta["data_start"] = format_iso8601_utc(bundle.meta.data_start);
  meta["data_end"] = format_iso8601_utc(bundle.meta.data_end);
  ordered_json ingest;
  ingest["total"] = bundle.meta.ingest.total;
  ingest["accepted"] = bundle.meta.ingest.accepted;
  ingest["filtered"] = bundle.meta.ingest.filtered;
  ingest["rejected"] = bundle.meta.ingest.rejected;
  ingest["rejected_by_reason"] = bundle.meta.ingest.rejected_by_reason;
  meta["ingest"] = ingest;
  meta["config"] = bundle.meta.config_json.empty()
                       ? ordered_json::object()
                       : ordered_json::parse(bundle.meta.config_json);
  doc["meta"] = meta;
  doc["top_isps"] = ordered_json::object();
  for (const auto& [metro, isps] : bundle.analysis.top_isps_by_metro)
    doc["top_isps"][metro] = isps;
  doc["metro_summaries"] = ordered_json::array();
  for (const auto& s : bundle.analysis.summaries) {
    ordered_json j;
    j["metro"] = s.metro;
    j["server_count"] = s.server_count;
    j["eligible_isp_count"] = s.eligible_isp_count;
    j["worst_by_metric"] = ordered_json::object();
    for (const auto& [metric, pr] : s.worst_by_metric)
      j["worst_by_metric"][metric] = pair_json(pr);
    doc["metro_summaries"].push_back(j);
  }
  doc["pairs"] = ordered_json::array();
  for (const auto& pr : bundle.analysis.pairs)
    doc["pairs"].push_back(pair_json(pr));
  doc["skipped_cells"] = ordered_json::array();
  for (const auto& sc : bundle.analysis.skipped) {
    ordered_json j;
    j["metro"] = sc.metro;
    j["client_asn"] = sc.client_asn;
    j["server_id"] = sc.server_id;
    j["metric"] = sc.metric;
    j["samples"] = sc.samples;
    doc["skipped_cells"].push_back(j);
  }
  doc["calibration"] = ordered_json::array();
  for (const auto& cal : bundle.analysis.calibration) {
    ordered_json j;
    j["metro"] = cal.metro;
    j["server_id"] = cal.server_id;
    j["flag"] = calibration_flag_name(cal.flag);
    if (cal.best_ks >= 0.0) j["best_ks"] = cal.best_ks;
    doc["calibration"].push_back(j);
  }
  return doc.dump(2) + "\n";
}

std::string emit_pairs_csv(const std::vector<PairResult>& pairs) {
  std::ostringstream out;
  out << "metro,client_asn,server_a,server_b,metric,ks_distance,spread,"
         "spread_folded,pain_ks,pain,n_a,n_b\n";
  for (const auto& pr : pairs) {
    out << pr.metro << ',' << pr.client_asn << ',' << pr.server_a << ','
        << pr.server_b << ',' << pr.metric << ',' << fmt(pr.stat.ks_distance)
        << ',' << fmt(pr.stat.spread) << ',' << fmt(pr.stat.spread_folded)
        << ',' << fmt(pr.stat.pain_ks) << ',' << fmt(pr.pain) << ','
        << pr.stat.n_a << ',' << pr.stat.n_b << "\n";
  }
  return out.str();
}

std::string emit_plot_json(const PlotDocument& doc) {
  ordered_json j;
  j["metro"] = doc.metro;
  j["client_asn"] = doc.client_asn;
  j["metric"] = doc.metric;
  j["x_axis"] = "log10";
  j["series"] = ordered_json::array();
  for (const auto& s : doc.series) {
    ordered_json sj;
    sj["label"] = s.label;
    sj["server_id"] = s.server_id;
    sj["n"] = s.total;
    sj["bin_centers"] = s.bin_centers;
    sj["density"] = s.density;
    sj["cumulative"] = s.cumulative;
    j["series"].push_back(sj);
  }
  j["below_sample_gate"] = ordered_json::array();
  for (const auto& sc : doc.footnote) {
    ordered_json fj;
    fj["server_id"] = sc.server_id;
    fj["samples"] = sc.samples;
    j["below_sample_gate"].push_back(fj);
  }
  if (!doc.note.empty()) j["note"] = doc.note;
  return j.dump(2) + "\n";
}

std::string emit_plot_svg(const PlotDocument& doc) {
  const double width = 840, height = 420;
  const double left = 60, right = 20, top = 40, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double log_min = 0.0, log_max = 1.0, dens_max = 0.0;
  bool first = true;
  for (const auto& s : doc.series) {
    for (size_t i = 0; i < s.bin_centers.size(); ++i) {
      const double lx = std::log10(s.bin_centers[i]);
      if (first) {
        log_min = log_max = lx;
        first = false;
      }
      log_min = std::min(log_min, lx);
      log_max = std::max(log_max, lx);
      dens_max = std::max(dens_max, s.density[i]);
    }
  }
  if (log_max <= log_min) log_max = log_min + 1.0;
  if (dens_max <= 0.0) dens_max = 1.0;

  auto x_of = [&](double value) {
    return left + (std::log10(value) - log_min) / (log_max - log_min) * plot_w;
  };
  auto y_of = [&](double density) {
    return top + plot_h - density / dens_max * plot_h;
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << svg_escape(doc.metro + " AS" + std::to_string(doc.client_asn) + " " +
                    doc.metric + " (density, log x)")
      << "</text>\n";
  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << left + plot_w << "\" y2=\"" << top + plot_h
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left
      << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  // decade ticks
  for (int d = static_cast<int>(std::ceil(log_min));
       d <= static_cast<int>(std::floor(log_max)); ++d) {
    const double x = left + (d - log_min) / (log_max - log_min) * plot_w;
    out << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x
        << "\" y2=\"" << top + plot_h + 6 << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 22
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << fmt_short(std::pow(10.0, d)) << "</text>\n";
  }
  size_t color = 0;
  double legend_y = top + 4;
  for (const auto& s : doc.series) {
    const char* stroke = kPalette[color % (sizeof(kPalette) / sizeof(*kPalette))];
    out << "<polyline fill=\"none\" stroke=\"" << stroke
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.bin_centers.size(); ++i)
      out << fmt_short(x_of(s.bin_centers[i])) << ','
          << fmt_short(y_of(s.density[i])) << ' ';
    out << "\"/>\n";
    out << "<text x=\"" << left + plot_w - 220 << "\" y=\"" << legend_y + 10
        << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"" << stroke
        << "\">" << svg_escape(s.label) << "</text>\n";
    legend_y += 16;
    ++color;
  }
  if (!doc.footnote.empty()) {
    std::string note = "below sample gate:";
    for (const auto& sc : doc.footnote)
      note += " " + sc.server_id + " (n=" + std::to_string(sc.samples) + ")";
    out << "<text x=\"" << left << "\" y=\"" << height - 10
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666\">"
        << svg_escape(note) << "</text>\n";
  }
  if (!doc.note.empty()) {
    out << "<text x=\"" << left << "\" y=\"" << top + plot_h / 2
        << "\" font-family=\"sans-serif\" font-size=\"13\">"
        << svg_escape(doc.note) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_bars(const std::vector<MetroSummary>& summaries,
                        const std::string& metric, PainMode mode) {
  struct Bar {
    std::string metro;
    double pain = 0.0;
    std::string annotation;
  };
  std::vector<Bar> bars;
  for (const auto& s : summaries) {
    auto it = s.worst_by_metric.find(metric);
    if (it == s.worst_by_metric.end()) continue;
    const PairResult& pr = it->second;
    Bar bar;
    bar.metro = s.metro;
    bar.pain = pain_score(pr.stat, mode);
    bar.annotation = "AS" + std::to_string(pr.client_asn) + " " + pr.server_a +
                     "|" + pr.server_b;
    bars.push_back(std::move(bar));
  }
  std::sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) {
    if (a.pain != b.pain) return a.pain > b.pain;
    return a.metro < b.metro;
  });

  const double width = std::max(320.0, 80.0 + bars.size() * 70.0);
  const double height = 360;
  const double left = 50, top = 40, bottom = 70;
  const double plot_h = height - top - bottom;
  double pain_max = 1.0;
  for (const auto& bar : bars) pain_max = std::max(pain_max, bar.pain);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << svg_escape("worst-case pain per metro: " + metric + " (" +
                    pain_mode_name(mode) + ")")
      << "</text>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\""
      << width - 20 << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
  double x = left + 10;
  for (const auto& bar : bars) {
    const double h = bar.pain / pain_max * plot_h;
    out << "<rect x=\"" << x << "\" y=\"" << top + plot_h - h
        << "\" width=\"44\" height=\"" << h << "\" fill=\"#1f77b4\"/>\n";
    out << "<text x=\"" << x + 22 << "\" y=\"" << top + plot_h - h - 6
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">"
        << fmt_short(bar.pain) << "</text>\n";
    out << "<text x=\"" << x + 22 << "\" y=\"" << top + plot_h + 16
        << "\" font-family=\"sans-serif\" font-size=\"12\" "
           "text-anchor=\"middle\">"
        << svg_escape(bar.metro) << "</text>\n";
    out << "<text x=\"" << x + 22 << "\" y=\"" << top + plot_h + 32
        << "\" font-family=\"sans-serif\" font-size=\"9\" "
           "text-anchor=\"middle\">"
        << svg_escape(bar.annotation) << "</text>\n";
    x += 70;
  }
  out << "</svg>\n";
  return out.str();
}

void write_report_tree(const std::string& out_dir, const ReportBundle& bundle,
                       const AnalysisConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  auto write_file = [](const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
  };
  write_file(fs::path(out_dir) / "summary.json",
             emit_summary(bundle, SummaryFormat::kJson));
  write_file(fs::path(out_dir) / "pairs.csv",
             emit_pairs_csv(bundle.analysis.pairs));
  for (const auto& doc : bundle.plots) {
    fs::path dir = fs::path(out_dir) / "metro" / doc.metro /
                   std::to_string(doc.client_asn);
    fs::create_directories(dir);
    write_file(dir / (doc.metric + ".json"), emit_plot_json(doc));
    write_file(dir / (doc.metric + ".svg"), emit_plot_svg(doc));
  }
  for (const std::string& metric : config.metrics) {
    for (PainMode mode : {PainMode::kKs, PainMode::kSpread}) {
      write_file(fs::path(out_dir) / ("bars_" + metric + "_" +
                                      pain_mode_name(mode) + ".svg"),
                 render_bars(bundle.analysis.summaries, metric, mode));
    }
  }
}

}  // namespace metrodiff
