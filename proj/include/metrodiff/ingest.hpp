#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "metrodiff/record.hpp"

namespace metrodiff {

enum class InputFormat { kDelimited, kJsonLines };

std::optional<InputFormat> parse_format_name(const std::string& name);
const char* format_name(InputFormat format);

enum class RejectReason {
  kMissingField,
  kNonNumeric,
  kBadTimestamp,
  kOutOfRange,
  kMalformed,
};

const char* reject_reason_name(RejectReason reason);

struct Rejection {
  RejectReason reason;
  std::string detail;
};

using ParseResult = std::variant<MeasurementRecord, Rejection>;

// Column layout of delimited input, taken from the header row.
struct CsvLayout {
  std::vector<std::string> columns;

  // timestamp,metro,server_id,server_asn,client_asn,download_mbps,
  // min_rtt_ms,upload_mbps,loss_rate
  static CsvLayout canonical();
  static std::optional<CsvLayout> from_header(const std::string& header_line);
};

// Parses one row. Malformed rows yield a Rejection, never an exception;
// unknown extra fields are ignored.
ParseResult parse_record(const std::string& line, InputFormat format,
                         const CsvLayout& layout = CsvLayout::canonical());

struct MetricRange {
  std::optional<double> min_value;
  std::optional<double> max_value;
};

// Pre-analysis record filter. Range violations count as rejected; window
// and metro exclusions count as filtered.
struct IngestFilter {
  std::optional<int64_t> time_from;  // inclusive
  std::optional<int64_t> time_to;    // exclusive
  std::set<std::string> metros;      // empty = allow all
  std::map<std::string, MetricRange> metric_ranges;

  void validate() const;
  bool passes_window(const MeasurementRecord& record) const;
  std::optional<Rejection> check_ranges(const MeasurementRecord& record) const;
};

// Mergeable by addition across disjoint input partitions.
struct IngestStats {
  uint64_t total = 0;
  uint64_t accepted = 0;
  uint64_t filtered = 0;
  uint64_t rejected = 0;
  std::map<std::string, uint64_t> rejected_by_reason;

  void merge(const IngestStats& other);
  bool operator==(const IngestStats&) const = default;
};

using RecordSink = std::function<void(const MeasurementRecord&)>;

// Visits every row exactly once; accepted + rejected + filtered == total.
IngestStats ingest_stream(std::istream& in, InputFormat format,
                          const IngestFilter& filter, const RecordSink& sink);

// Convenience wrapper collecting accepted records.
IngestStats ingest_stream(std::istream& in, InputFormat format,
                          const IngestFilter& filter,
                          std::vector<MeasurementRecord>& out);

// Throws std::runtime_error naming the path if the file cannot be opened.
IngestStats ingest_file(const std::string& path, InputFormat format,
                        const IngestFilter& filter, const RecordSink& sink);

// Writers for the same two formats; used by the simulator and fixtures.
void write_records_delimited(std::ostream& out,
                             const std::vector<MeasurementRecord>& records);
void write_records_jsonl(std::ostream& out,
                         const std::vector<MeasurementRecord>& records);

}  // namespace metrodiff
