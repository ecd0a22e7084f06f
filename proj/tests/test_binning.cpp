#include <doctest.h>

#include <cmath>

#include "metrodiff/binning.hpp"
#include "metrodiff/rng.hpp"

using namespace metrodiff;

TEST_CASE("bin_index basic geometry") {
  BinningScheme s;
  s.bins_per_decade = 10;
  CHECK(s.bin_index(1.0) == 0);
  CHECK(s.bin_index(100.0) == 20);  // two decades

  BinningScheme s30;
  CHECK(s30.bin_index(87.5) == 58);  // floor(30*log10(87.5)) = floor(58.26)
}

TEST_CASE("values below/above range land in sentinel bins") {
  BinningScheme s;
  CHECK(s.bin_index(0.005) == kUnderflowBin);
  CHECK(s.bin_index(0.01) == kUnderflowBin);  // boundary is inclusive below
  CHECK(s.bin_index(1e5) == kOverflowBin);
  CHECK(s.bin_index(1e7) == kOverflowBin);
  CHECK(s.bin_index(0.5) != kUnderflowBin);
}

TEST_CASE("bin_index rejects non-positive and non-finite values") {
  BinningScheme s;
  CHECK_THROWS_AS(s.bin_index(0.0), std::invalid_argument);
  CHECK_THROWS_AS(s.bin_index(-3.0), std::invalid_argument);
  CHECK_THROWS_AS(s.bin_index(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(s.bin_index(INFINITY), std::invalid_argument);
}

TEST_CASE("bin_index is monotone and centers lie inside boundaries") {
  BinningScheme s;
  Rng rng(99);
  for (int i = 0; i < 5000; ++i) {
    double v = std::pow(10.0, -3.0 + 9.0 * rng.uniform());
    int32_t bin = s.bin_index(v);
    if (bin != kUnderflowBin && bin != kOverflowBin) {
      CHECK(s.center(bin) >= s.lower_bound(bin));
      CHECK(s.center(bin) < s.upper_bound(bin));
      CHECK(v >= s.lower_bound(bin) * (1 - 1e-12));
      CHECK(v < s.upper_bound(bin) * (1 + 1e-12));
    }
  }
  // Monotonicity over an increasing sweep.
  int32_t last = kUnderflowBin;
  for (double v = 0.001; v < 2e5; v *= 1.01) {
    int32_t bin = s.bin_index(v);
    CHECK(bin >= last);
    last = bin;
  }
}

TEST_CASE("scheme validation") {
  BinningScheme s;
  s.bins_per_decade = 0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = BinningScheme{};
  s.underflow_below = 10.0;
  s.overflow_above = 1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_NOTHROW(BinningScheme{}.validate());
}
