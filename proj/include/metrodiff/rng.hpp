#pragma once

#include <cstdint>
#include <random>

namespace metrodiff {

// splitmix64, used to derive independent seeds from a base seed plus
// stream identifiers. Output is fully determined by the input.
uint64_t mix64(uint64_t x);

uint64_t derive_seed(uint64_t base, uint64_t stream_a, uint64_t stream_b = 0);

// Seedable portable generator: mt19937_64 core with hand-rolled uniform
// and normal transforms, so sampled values are identical on every
// platform and standard library.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1) with 53-bit resolution.
  double uniform();
  // Uniform in (0, 1], never zero.
  double uniform_pos();
  // Standard normal via Box-Muller (one draw consumes two uniforms).
  double normal();
  // exp(mu_log10 applied in base 10): median * 10^(sigma_log10 * N(0,1)).
  double lognormal10(double median, double sigma_log10);
  // Unit-mean exponential.
  double exponential();
  // Uniform integer in [0, n).
  uint64_t below(uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace metrodiff
