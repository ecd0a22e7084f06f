#include <doctest.h>

#include "metrodiff/time_util.hpp"

using namespace metrodiff;

TEST_CASE("iso8601 round trip") {
  auto t = parse_iso8601_utc("2025-11-24T03:00:00Z");
  REQUIRE(t.has_value());
  CHECK(format_iso8601_utc(*t) == "2025-11-24T03:00:00Z");
  CHECK(*t == 1763953200);  // date -d ... +%s

  CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
  CHECK(format_iso8601_utc(0) == "1970-01-01T00:00:00Z");
}

TEST_CASE("iso8601 rejects malformed timestamps") {
  CHECK(!parse_iso8601_utc("2025-11-24 03:00:00"));
  CHECK(!parse_iso8601_utc("2025-11-24T03:00:00"));
  CHECK(!parse_iso8601_utc("2025-13-01T00:00:00Z"));
  CHECK(!parse_iso8601_utc("2025-02-30T00:00:00Z"));
  CHECK(!parse_iso8601_utc("2025-11-24T25:00:00Z"));
  CHECK(!parse_iso8601_utc("garbage"));
  CHECK(!parse_iso8601_utc("2025-11-24T03:00:00Zx"));
}

TEST_CASE("leap day") {
  auto t = parse_iso8601_utc("2024-02-29T12:00:00Z");
  REQUIRE(t.has_value());
  CHECK(format_iso8601_utc(*t) == "2024-02-29T12:00:00Z");
  CHECK(!parse_iso8601_utc("2023-02-29T12:00:00Z"));
}
