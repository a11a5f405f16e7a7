#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace zebra {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
  double low;
  double high;
};

// Wilson score interval for `successes` out of `trials` Bernoulli draws.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2.0 * n)) / denom;
  const double half = z / denom * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  // The score interval always contains phat; clamp away rounding at the ends.
  double low = std::clamp(center - half, 0.0, phat);
  double high = std::clamp(center + half, phat, 1.0);
  if (successes == 0) low = 0.0;
  if (successes == trials) high = 1.0;
  return {low, high};
}

}  // namespace zebra
