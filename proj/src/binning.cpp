#include "metrodiff/binning.hpp"

#include <cmath>
#include <string>

namespace metrodiff {

void BinningScheme::validate() const {
  if (bins_per_decade <= 0)
    throw std::invalid_argument("bins_per_decade must be positive");
  if (!(reference > 0.0) || !std::isfinite(reference))
    throw std::invalid_argument("reference must be positive and finite");
  if (!(underflow_below > 0.0) || !(overflow_above > 0.0))
    throw std::invalid_argument("underflow/overflow limits must be positive");
  if (!(underflow_below < overflow_above))
    throw std::invalid_argument("underflow_below must be < overflow_above");
}

int32_t BinningScheme::bin_index(double value) const {
  if (!(value > 0.0) || !std::isfinite(value))
    throw std::invalid_argument("bin_index requires a positive finite value, got " +
                                std::to_string(value));
  if (value <= underflow_below) return kUnderflowBin;
  if (value >= overflow_above) return kOverflowBin;
  return static_cast<int32_t>(
      std::floor(bins_per_decade * std::log10(value / reference)));
}

double BinningScheme::lower_bound(int32_t index) const {
  return reference * std::pow(10.0, static_cast<double>(index) / bins_per_decade);
}

double BinningScheme::upper_bound(int32_t index) const {
  return reference *
         std::pow(10.0, static_cast<double>(index + 1) / bins_per_decade);
}

double BinningScheme::center(int32_t index) const {
  if (index == kUnderflowBin) return underflow_below;
  if (index == kOverflowBin) return overflow_above;
  return reference * std::pow(10.0, (index + 0.5) / bins_per_decade);
}

}  // namespace metrodiff
