#include "gelato/early_exit.hpp"

#include <algorithm>
#include <stdexcept>

namespace gelato {

UncertaintyBucket bucket_step(UncertaintyBucket b, double entropy) {
  if (!(entropy >= 0)) throw std::invalid_argument("entropy must be >= 0");
  b.level = std::max(0.0, b.level + entropy - b.drain);
  return b;
}

double default_cap(double entropy_threshold, double multiplier) {
  if (!(multiplier > 0)) throw std::invalid_argument("cap multiplier must be > 0");
  return multiplier * entropy_threshold;
}

}  // namespace gelato
