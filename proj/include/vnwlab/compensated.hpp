#pragma once

#include <cmath>

namespace vnwlab {

/// Neumaier's variant of Kahan summation: also compensates when the
/// incoming term is larger than the running sum.
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;

  void add(double value) noexcept {
    const double t = sum + value;
    if (std::fabs(sum) >= std::fabs(value)) {
      compensation += (sum - t) + value;
    } else {
      compensation += (value - t) + sum;
    }
    sum = t;
  }

  CompensatedSum& operator+=(double value) noexcept {
    add(value);
    return *this;
  }

  double value() const noexcept { return sum + compensation; }
};

}  // namespace vnwlab
