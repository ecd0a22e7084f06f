#include "metrodiff/rng.hpp"

#include <cmath>
#include <numbers>

namespace metrodiff {

uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t stream_a, uint64_t stream_b) {
  return mix64(mix64(base ^ 0x6d5f2a3bc1904a7dull) ^ mix64(stream_a) ^
               mix64(mix64(stream_b) + 0x51ed270b8a45c96full));
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::lognormal10(double median, double sigma_log10) {
  return median * std::pow(10.0, sigma_log10 * normal());
}

double Rng::exponential() { return -std::log(uniform_pos()); }

uint64_t Rng::below(uint64_t n) {
  // Rejection sampling keeps the draw unbiased for any n.
  const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace metrodiff
