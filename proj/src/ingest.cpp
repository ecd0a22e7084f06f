#include "metrodiff/ingest.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metrodiff/time_util.hpp"

namespace metrodiff {
namespace {

using nlohmann::json;

const std::vector<std::string> kStructuralColumns = {
    "timestamp", "metro", "server_id", "server_asn", "client_asn"};

const std::vector<std::string> kMetricColumns = {kDownloadMbps, kMinRttMs,
                                                 kUploadMbps, kLossRate};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::optional<double> parse_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  return v;
}

std::optional<uint32_t> parse_asn(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size()) return std::nullopt;
  if (v < 1 || v > 0xffffffffull) return std::nullopt;
  return static_cast<uint32_t>(v);
}

Rejection reject(RejectReason reason, std::string detail) {
  return Rejection{reason, std::move(detail)};
}

// Structural validation shared by both formats.
std::optional<Rejection> validate_record(const MeasurementRecord& r) {
  if (r.metro.empty()) return reject(RejectReason::kMissingField, "metro");
  if (r.server_id.empty())
    return reject(RejectReason::kMissingField, "server_id");
  if (r.server_id.rfind(r.metro, 0) != 0)
    return reject(RejectReason::kMalformed,
                  "server_id '" + r.server_id + "' does not begin with metro '" +
                      r.metro + "'");
  for (const auto& [name, value] : r.metrics) {
    if (!metric_value_valid(name, value))
      return reject(RejectReason::kOutOfRange,
                    name + "=" + std::to_string(value));
  }
  return std::nullopt;
}

ParseResult parse_delimited(const std::string& line, const CsvLayout& layout) {
  auto fields = split_csv(line);
  if (fields.size() < layout.columns.size()) {
    // Trailing optional metric columns may be omitted entirely.
    fields.resize(layout.columns.size());
  } else if (fields.size() > layout.columns.size()) {
    return reject(RejectReason::kMalformed, "too many fields");
  }
  MeasurementRecord r;
  for (size_t i = 0; i < layout.columns.size(); ++i) {
    const std::string& col = layout.columns[i];
    const std::string& field = fields[i];
    if (col == "timestamp") {
      if (field.empty()) return reject(RejectReason::kMissingField, col);
      auto t = parse_iso8601_utc(field);
      if (!t) return reject(RejectReason::kBadTimestamp, field);
      r.timestamp = *t;
    } else if (col == "metro") {
      r.metro = field;
    } else if (col == "server_id") {
      r.server_id = field;
    } else if (col == "server_asn" || col == "client_asn") {
      if (field.empty()) return reject(RejectReason::kMissingField, col);
      auto asn = parse_asn(field);
      if (!asn) {
        bool numeric = !field.empty() &&
                       field.find_first_not_of("0123456789") == std::string::npos;
        return reject(numeric ? RejectReason::kOutOfRange
                              : RejectReason::kNonNumeric,
                      col + "=" + field);
      }
      (col == "server_asn" ? r.server_asn : r.client_asn) = *asn;
    } else if (is_known_metric(col)) {
      if (field.empty()) continue;  // metric absent for this test
      auto v = parse_double(field);
      if (!v) return reject(RejectReason::kNonNumeric, col + "=" + field);
      r.metrics[col] = *v;
    }
    // Unknown extra columns are ignored.
  }
  if (auto bad = validate_record(r)) return *bad;
  return r;
}

ParseResult parse_jsonl(const std::string& line) {
  json doc = json::parse(line, nullptr, false);
  if (doc.is_discarded() || !doc.is_object())
    return reject(RejectReason::kMalformed, "not a JSON object");
  MeasurementRecord r;
  if (!doc.contains("timestamp"))
    return reject(RejectReason::kMissingField, "timestamp");
  if (doc["timestamp"].is_string()) {
    auto t = parse_iso8601_utc(doc["timestamp"].get<std::string>());
    if (!t)
      return reject(RejectReason::kBadTimestamp,
                    doc["timestamp"].get<std::string>());
    r.timestamp = *t;
  } else if (doc["timestamp"].is_number_integer()) {
    r.timestamp = doc["timestamp"].get<int64_t>();
  } else {
    return reject(RejectReason::kBadTimestamp, doc["timestamp"].dump());
  }
  for (const char* key : {"metro", "server_id"}) {
    if (!doc.contains(key) || !doc[key].is_string())
      return reject(RejectReason::kMissingField, key);
  }
  r.metro = doc["metro"].get<std::string>();
  r.server_id = doc["server_id"].get<std::string>();
  for (const char* key : {"server_asn", "client_asn"}) {
    if (!doc.contains(key))
      return reject(RejectReason::kMissingField, key);
    if (!doc[key].is_number_integer())
      return reject(RejectReason::kNonNumeric, key);
    int64_t v = doc[key].get<int64_t>();
    if (v < 1 || v > 0xffffffffll)
      return reject(RejectReason::kOutOfRange,
                    std::string(key) + "=" + std::to_string(v));
    (std::string(key) == "server_asn" ? r.server_asn : r.client_asn) =
        static_cast<uint32_t>(v);
  }
  for (const std::string& name : kMetricColumns) {
    if (!doc.contains(name) || doc[name].is_null()) continue;
    if (!doc[name].is_number())
      return reject(RejectReason::kNonNumeric, name);
    r.metrics[name] = doc[name].get<double>();
  }
  if (auto bad = validate_record(r)) return *bad;
  return r;
}

}  // namespace

std::optional<InputFormat> parse_format_name(const std::string& name) {
  if (name == "csv" || name == "delimited") return InputFormat::kDelimited;
  if (name == "jsonl" || name == "json-lines") return InputFormat::kJsonLines;
  return std::nullopt;
}

const char* format_name(InputFormat format) {
  return format == InputFormat::kDelimited ? "csv" : "jsonl";
}

const char* reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::kMissingField: return "missing_field";
    case RejectReason::kNonNumeric: return "non_numeric";
    case RejectReason::kBadTimestamp: return "bad_timestamp";
    case RejectReason::kOutOfRange: return "out_of_range";
    case RejectReason::kMalformed: return "malformed";
  }
  return "unknown";
}

CsvLayout CsvLayout::canonical() {
  CsvLayout layout;
  layout.columns = kStructuralColumns;
  for (const auto& m : kMetricColumns) layout.columns.push_back(m);
  return layout;
}

std::optional<CsvLayout> CsvLayout::from_header(const std::string& header) {
  CsvLayout layout;
  layout.columns = split_csv(header);
  for (const auto& required : kStructuralColumns) {
    bool found = false;
    for (const auto& c : layout.columns) found |= (c == required);
    if (!found) return std::nullopt;
  }
  return layout;
}

ParseResult parse_record(const std::string& line, InputFormat format,
                         const CsvLayout& layout) {
  return format == InputFormat::kDelimited ? parse_delimited(line, layout)
                                           : parse_jsonl(line);
}

void IngestFilter::validate() const {
  if (time_from && time_to && !(*time_from < *time_to))
    throw std::invalid_argument("filter time window start must precede end");
}

bool IngestFilter::passes_window(const MeasurementRecord& r) const {
  if (time_from && r.timestamp < *time_from) return false;
  if (time_to && r.timestamp >= *time_to) return false;
  if (!metros.empty() && !metros.count(r.metro)) return false;
  return true;
}

std::optional<Rejection> IngestFilter::check_ranges(
    const MeasurementRecord& r) const {
  for (const auto& [metric, range] : metric_ranges) {
    auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    if ((range.min_value && it->second < *range.min_value) ||
        (range.max_value && it->second > *range.max_value)) {
      return Rejection{RejectReason::kOutOfRange,
                       metric + "=" + std::to_string(it->second) +
                           " outside configured range"};
    }
  }
  return std::nullopt;
}

void IngestStats::merge(const IngestStats& other) {
  total += other.total;
  accepted += other.accepted;
  filtered += other.filtered;
  rejected += other.rejected;
  for (const auto& [reason, count] : other.rejected_by_reason)
    rejected_by_reason[reason] += count;
}

IngestStats ingest_stream(std::istream& in, InputFormat format,
                          const IngestFilter& filter, const RecordSink& sink) {
  filter.validate();
  IngestStats stats;
  CsvLayout layout = CsvLayout::canonical();
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first && format == InputFormat::kDelimited) {
      first = false;
      auto parsed = CsvLayout::from_header(line);
      if (!parsed)
        throw std::runtime_error("delimited input is missing a header row");
      layout = *parsed;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    ++stats.total;
    ParseResult result = parse_record(line, format, layout);
    if (auto* rej = std::get_if<Rejection>(&result)) {
      ++stats.rejected;
      ++stats.rejected_by_reason[reject_reason_name(rej->reason)];
      continue;
    }
    const auto& record = std::get<MeasurementRecord>(result);
    if (auto rej = filter.check_ranges(record)) {
      ++stats.rejected;
      ++stats.rejected_by_reason[reject_reason_name(rej->reason)];
      continue;
    }
    if (!filter.passes_window(record)) {
      ++stats.filtered;
      continue;
    }
    ++stats.accepted;
    if (sink) sink(record);
  }
  return stats;
}

IngestStats ingest_stream(std::istream& in, InputFormat format,
                          const IngestFilter& filter,
                          std::vector<MeasurementRecord>& out) {
  return ingest_stream(in, format, filter,
                       [&out](const MeasurementRecord& r) { out.push_back(r); });
}

IngestStats ingest_file(const std::string& path, InputFormat format,
                        const IngestFilter& filter, const RecordSink& sink) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open input file: " + path);
  return ingest_stream(in, format, filter, sink);
}

void write_records_delimited(std::ostream& out,
                             const std::vector<MeasurementRecord>& records) {
  out << "timestamp,metro,server_id,server_asn,client_asn,download_mbps,"
         "min_rtt_ms,upload_mbps,loss_rate\n";
  char buf[40];
  auto metric = [&](const MeasurementRecord& r, const char* name) {
    auto it = r.metrics.find(name);
    if (it == r.metrics.end()) return std::string();
    std::snprintf(buf, sizeof(buf), "%.17g", it->second);
    return std::string(buf);
  };
  for (const auto& r : records) {
    out << format_iso8601_utc(r.timestamp) << ',' << r.metro << ','
        << r.server_id << ',' << r.server_asn << ',' << r.client_asn << ','
        << metric(r, kDownloadMbps) << ',' << metric(r, kMinRttMs) << ','
        << metric(r, kUploadMbps) << ',' << metric(r, kLossRate) << "\n";
  }
}

void write_records_jsonl(std::ostream& out,
                         const std::vector<MeasurementRecord>& records) {
  for (const auto& r : records) {
    json doc;
    doc["timestamp"] = format_iso8601_utc(r.timestamp);
    doc["metro"] = r.metro;
    doc["server_id"] = r.server_id;
    doc["server_asn"] = r.server_asn;
    doc["client_asn"] = r.client_asn;
    for (const auto& [name, value] : r.metrics) doc[name] = value;
    out << doc.dump() << "\n";
  }
}

}  // namespace metrodiff
