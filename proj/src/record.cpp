#include "metrodiff/record.hpp"

#include <cmath>

namespace metrodiff {

bool is_known_metric(const std::string& name) {
  return name == kDownloadMbps || name == kMinRttMs || name == kUploadMbps ||
         name == kLossRate;
}

bool metric_value_valid(const std::string& name, double value) {
  if (!std::isfinite(value)) return false;
  if (name == kLossRate) return value >= 0.0 && value <= 1.0;
  return value > 0.0;
}

}  // namespace metrodiff
