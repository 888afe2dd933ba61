#pragma once

// Double-double arithmetic: a real number carried as the unevaluated sum
// hi + lo of two binary64 values, giving a ~106-bit significand.
//
// The algorithms are the classic Dekker/Knuth error-free transformations
// combined as in Joldes, Muller and Popescu, "Tight and rigorous error
// bounds for basic building blocks of double-word arithmetic" (TOMS 2017).
// They assume round-to-nearest binary64 and no compiler contraction of
// a*b+c (the build passes -ffp-contract=off).

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

namespace vnwlab {

namespace eft {

/// s + err == a + b exactly.
inline double two_sum(double a, double b, double& err) noexcept {
  const double s = a + b;
  const double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

/// Requires |a| >= |b| (or a == 0).
inline double fast_two_sum(double a, double b, double& err) noexcept {
  const double s = a + b;
  err = b - (s - a);
  return s;
}

inline void split(double a, double& hi, double& lo) noexcept {
  constexpr double splitter = 134217729.0;  // 2^27 + 1
  const double t = splitter * a;
  hi = t - (t - a);
  lo = a - hi;
}

/// p + err == a * b exactly (barring overflow/underflow).
inline double two_prod(double a, double b, double& err) noexcept {
  const double p = a * b;
#ifdef FP_FAST_FMA
  err = std::fma(a, b, -p);
#else
  double ah, al, bh, bl;
  split(a, ah, al);
  split(b, bh, bl);
  err = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
#endif
  return p;
}

}  // namespace eft

struct DD {
  double hi = 0.0;
  double lo = 0.0;

  constexpr DD() = default;
  constexpr DD(double x) : hi(x), lo(0.0) {}  // NOLINT: implicit widening is intended

  /// Builds a normalized value from an arbitrary pair whose sum is represented.
  static DD from_sum(double a, double b) noexcept {
    DD r;
    r.hi = eft::two_sum(a, b, r.lo);
    return r;
  }

  /// Exact for |x| < 2^106.
  static DD from_int(std::int64_t x) noexcept {
    const double h = static_cast<double>(x);
    const double l = static_cast<double>(x - static_cast<std::int64_t>(h));
    return from_sum(h, l);
  }

  constexpr double to_double() const noexcept { return hi; }
};

inline DD operator-(DD a) noexcept { return DD::from_sum(-a.hi, -a.lo); }

inline DD operator+(DD a, DD b) noexcept {
  double e;
  double s = eft::two_sum(a.hi, b.hi, e);
  double f;
  const double t = eft::two_sum(a.lo, b.lo, f);
  e += t;
  s = eft::fast_two_sum(s, e, e);
  e += f;
  DD r;
  r.hi = eft::fast_two_sum(s, e, r.lo);
  return r;
}

inline DD operator-(DD a, DD b) noexcept { return a + (-b); }

inline DD operator*(DD a, DD b) noexcept {
  double e;
  const double p = eft::two_prod(a.hi, b.hi, e);
  e += a.hi * b.lo + a.lo * b.hi;
  DD r;
  r.hi = eft::fast_two_sum(p, e, r.lo);
  return r;
}

/// DD times a plain double; cheaper than promoting the double.
inline DD mul(DD a, double b) noexcept {
  double e;
  const double p = eft::two_prod(a.hi, b, e);
  e += a.lo * b;
  DD r;
  r.hi = eft::fast_two_sum(p, e, r.lo);
  return r;
}

/// Division by zero yields a non-finite value; see isfinite().
inline DD operator/(DD a, DD b) noexcept {
  const double q1 = a.hi / b.hi;
  DD r = a - mul(b, q1);
  const double q2 = r.hi / b.hi;
  r = r - mul(b, q2);
  const double q3 = r.hi / b.hi;
  double e;
  const double s = eft::fast_two_sum(q1, q2, e);
  return DD::from_sum(s, e) + DD(q3);
}

inline DD& operator+=(DD& a, DD b) noexcept { return a = a + b; }
inline DD& operator-=(DD& a, DD b) noexcept { return a = a - b; }
inline DD& operator*=(DD& a, DD b) noexcept { return a = a * b; }
inline DD& operator/=(DD& a, DD b) noexcept { return a = a / b; }

/// Lexicographic on (hi, lo), which is the value order for normalized operands.
inline std::partial_ordering operator<=>(DD a, DD b) noexcept {
  if (auto c = a.hi <=> b.hi; c != 0) return c;
  return a.lo <=> b.lo;
}
inline bool operator==(DD a, DD b) noexcept { return a.hi == b.hi && a.lo == b.lo; }

inline bool isfinite(DD a) noexcept { return std::isfinite(a.hi) && std::isfinite(a.lo); }
inline bool is_normalized(DD a) noexcept { return a.hi + a.lo == a.hi; }
inline DD abs(DD a) noexcept { return a.hi < 0.0 || (a.hi == 0.0 && a.lo < 0.0) ? -a : a; }
inline int sign(DD a) noexcept { return a.hi > 0.0 ? 1 : (a.hi < 0.0 ? -1 : 0); }

/// One Newton correction on the binary64 root; NaN for negative arguments.
inline DD sqrt(DD a) noexcept {
  if (a.hi == 0.0) return DD{};
  if (a.hi < 0.0) return DD(std::numeric_limits<double>::quiet_NaN());
  const double q = std::sqrt(a.hi);
  double e;
  const double p = eft::two_prod(q, q, e);
  const DD r = a - DD::from_sum(p, e);
  return DD::from_sum(q, r.hi / (2.0 * q));
}

inline DD square(DD a) noexcept { return a * a; }

namespace dd_constants {
inline constexpr double pi_hi = 3.141592653589793116e+00;
inline constexpr double pi_lo = 1.224646799147353207e-16;
}  // namespace dd_constants

inline DD dd_pi() noexcept { return DD::from_sum(dd_constants::pi_hi, dd_constants::pi_lo); }

/// Scientific notation with `digits` significant decimal digits.
std::string to_string(DD x, int digits = 32);

/// Accepts the output of to_string as well as plain decimal literals.
/// Throws Error{ParseError} on malformed input.
DD parse_dd(std::string_view text);

}  // namespace vnwlab
