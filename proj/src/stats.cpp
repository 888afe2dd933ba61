#include "vnwlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vnwlab/errors.hpp"

namespace vnwlab {

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::TooFewPoints, "line fit needs at least two (x, y) pairs");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorCode::TooFewPoints, "line fit needs distinct abscissae");
  LinearFit fit;
  fit.points = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<std::int64_t> geometric_grid(std::int64_t lo, std::int64_t hi, int steps_per_decade) {
  std::vector<std::int64_t> grid;
  if (lo < 1 || hi < lo || steps_per_decade < 1) return grid;
  const int e_lo = static_cast<int>(std::floor(std::log10(static_cast<double>(lo)) * steps_per_decade - 1e-9));
  const int e_hi = static_cast<int>(std::ceil(std::log10(static_cast<double>(hi)) * steps_per_decade + 1e-9));
  for (int e = e_lo; e <= e_hi; ++e) {
    const auto n = static_cast<std::int64_t>(std::llround(std::pow(10.0, static_cast<double>(e) / steps_per_decade)));
    if (n < lo || n > hi) continue;
    if (grid.empty() || grid.back() != n) grid.push_back(n);
  }
  return grid;
}

BoundednessReport check_bounded(std::string name, std::vector<NormalizedSample> samples,
                                std::int64_t ref_lo, std::int64_t ref_hi, double factor) {
  BoundednessReport report;
  report.name = std::move(name);
  report.factor = factor;
  std::vector<double> ref;
  bool finite = true;
  for (const auto& s : samples) {
    const double a = std::fabs(s.value);
    if (!std::isfinite(a)) finite = false;
    if (s.n >= ref_lo && s.n <= ref_hi) ref.push_back(a);
    if (a > report.max_value || report.argmax_n == 0) {
      report.max_value = a;
      report.argmax_n = s.n;
    }
  }
  report.reference_median = median(ref);
  report.bounded = finite && !ref.empty() && report.max_value <= factor * report.reference_median;
  report.samples = std::move(samples);
  return report;
}

}  // namespace vnwlab
