#include "fairdiv/rng.hpp"

#include <cmath>
#include <numbers>

namespace fairdiv {

double Stream::next_gaussian() {
  // 1 - u keeps the argument of log strictly positive.
  const double u1 = 1.0 - next_double();
  const double u2 = next_double();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace fairdiv
