#pragma once

// Exact rational reference for double-double values. Every binary64 is a
// dyadic rational, so hi + lo converts to mpq_class without rounding.

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "vnwlab/ddreal.hpp"

namespace vnwlab::testing {

inline mpq_class exact(double x) { return mpq_class(x); }
inline mpq_class exact(DD x) { return mpq_class(x.hi) + mpq_class(x.lo); }

/// |got - want| / |want| as a double; 0 when both vanish.
inline double rel_error(const mpq_class& got, const mpq_class& want) {
  if (want == 0) return got == 0 ? 0.0 : INFINITY;
  mpq_class d = got - want;
  d /= want;
  return std::fabs(d.get_d());
}

/// |lo| <= ulp(hi) / 2 and hi == fl(hi + lo).
inline bool normalized(DD x) {
  if (x.hi == 0.0) return x.lo == 0.0;
  if (x.hi + x.lo != x.hi) return false;
  const double ulp = std::nextafter(std::fabs(x.hi), INFINITY) - std::fabs(x.hi);
  return std::fabs(x.lo) <= 0.5 * ulp;
}

/// Random normalized DD with |hi| in [2^-e, 2^e] and a full-width tail.
class RandomDD {
 public:
  explicit RandomDD(std::uint64_t seed, int exponent_range = 30) : rng_(seed), exp_(-exponent_range, exponent_range) {}

  DD operator()(bool allow_negative = true) {
    const double m = unit_(rng_) + 1.0;
    double hi = std::ldexp(m, exp_(rng_));
    if (allow_negative && coin_(rng_)) hi = -hi;
    const double lo = std::ldexp(unit_(rng_) - 0.5, std::ilogb(hi) - 53);
    return DD::from_sum(hi, lo);
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_int_distribution<int> exp_;
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  std::bernoulli_distribution coin_{0.5};
};

}  // namespace vnwlab::testing
