#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace vnwlab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Ordinary least squares y = intercept + slope * x. Requires >= 2 points
/// with distinct x; r2 is clamped to [0, 1].
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> values);

/// Integer sites n = round(10^(e/steps_per_decade)) for n in [lo, hi],
/// duplicates removed.
std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int steps_per_decade = 4);

/// One sampled normalized error q(n) of an asymptotic statement.
struct NormalizedSample {
  std::int64_t n = 0;
  double value = 0.0;
};

/// Boundedness of a normalized error: the largest |q(n)| over the sampled
/// range must not exceed `factor` times the median of |q(n)| over the
/// reference window [ref_lo, ref_hi].
struct BoundednessReport {
  std::string name;
  std::vector<NormalizedSample> samples;
  double reference_median = 0.0;
  double max_value = 0.0;
  std::int64_t argmax_n = 0;
  double factor = 2.0;
  bool bounded = false;
};

BoundednessReport check_bounded(std::string name, std::vector<NormalizedSample> samples,
                                std::int64_t ref_lo, std::int64_t ref_hi, double factor = 2.0);

}  // namespace vnwlab
