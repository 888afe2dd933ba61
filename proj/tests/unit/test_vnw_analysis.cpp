#include <gmpxx.h>

#include <cmath>
#include <vector>

#include "doctest.h"
#include "rational_oracle.hpp"
#include "vnwlab/errors.hpp"
#include "vnwlab/vnw_analysis.hpp"

using namespace vnwlab;
using vnwlab::testing::exact;
using vnwlab::testing::rel_error;

namespace {

double rel(DD got, DD want) { return std::fabs(((got - want) / want).hi); }

double max_abs(const Mat2<DD>& m) {
  return std::max({std::fabs(m(0, 0).hi), std::fabs(m(0, 1).hi), std::fabs(m(1, 0).hi), std::fabs(m(1, 1).hi)});
}

const VnwAnalysis& shared() {
  static const VnwAnalysis an(200'001);
  return an;
}

/// Coordinates of the pair (y_n, y_{n+1}) in the rescaled basis, by Wronskians.
Vec2<DD> coordinates(const BasisTable& b, std::int64_t n, DD y0, DD y1) {
  const DD p0 = b.phi(n), p1 = b.phi(n + 1);
  const DD q0 = p0 * b.C(n), q1 = p1 * b.C(n + 1);
  const DD w = p0 * q1 - p1 * q0;
  return {(y0 * q1 - y1 * q0) / w, (p0 * y1 - p1 * y0) / w};
}

}  // namespace

TEST_CASE("phi small values") {
  const BasisTable b(16);
  CHECK(b.phi_raw(0) == DD(1.0));
  CHECK(b.phi_raw(1) == DD(1.0));
  CHECK(b.phi_raw(2) == DD(2.0));
  CHECK(b.phi_raw(3) == DD(2.0));
  CHECK(rel(b.phi_raw(4), DD(8.0) / DD(3.0)) <= 1e-31);
  CHECK(b.phi_raw(5) == b.phi_raw(4));
}

TEST_CASE("phi against the exact rational product") {
  const BasisTable b(401);
  mpq_class p = 1;
  for (std::int64_t m = 1; m <= 200; ++m) {
    p *= mpq_class(2 * m, 2 * m - 1);
    CHECK(rel_error(exact(b.phi_raw(2 * m)), p) <= 1e-29);
    CHECK(b.phi_raw(2 * m + 1) == b.phi_raw(2 * m));
    CHECK(b.log_phi_raw(2 * m) == doctest::Approx(std::log(p.get_d())).epsilon(1e-14));
  }
}

TEST_CASE("phi solves the unperturbed band-edge recursion") {
  const BasisTable b(20'000);
  for (std::int64_t n = 1; n < 20'000; ++n) {
    const DD v0 = DD(n % 2 == 0 ? 1.0 : -1.0) / DD(static_cast<double>(n));
    const DD r = b.phi_raw(n + 1) + b.phi_raw(n - 1) + (v0 - DD(2.0)) * b.phi_raw(n);
    CHECK(std::fabs((r / b.phi_raw(n)).hi) <= 1e-28);
  }
}

TEST_CASE("Wronskian and monotone C") {
  const BasisTable& b = shared().basis();
  auto wronskian = [&](std::int64_t n) {
    const DD p0 = b.phi(n), p1 = b.phi(n + 1);
    return p0 * (b.C(n + 1) * p1) - p1 * (b.C(n) * p0);
  };
  CHECK(std::fabs((wronskian(100) - DD(1.0)).hi) <= 1e-12);
  for (std::int64_t n = 2; n < b.max_n(); ++n) {
    CHECK(b.C(n + 1) > b.C(n));
    if (n % 997 == 0) CHECK(std::fabs((wronskian(n) - DD(1.0)).hi) <= 1e-12);
  }
}

TEST_CASE("Wallis limit") {
  const BasisTable& b = shared().basis();
  CHECK(wallis_kappa().hi == doctest::Approx(std::sqrt(M_PI / 2)).epsilon(1e-16));
  const double r = (b.phi_raw(20'000) / sqrt(DD(20'000.0))).hi;
  CHECK(std::fabs(r - 1.2533141) <= 1e-4);
  auto dev = [&](std::int64_t n) {
    return std::fabs((b.phi_raw(2 * n) / sqrt(DD(2.0 * n)) - wallis_kappa()).hi);
  };
  const double shrink = dev(1000) / dev(4000);
  CHECK(shrink == doctest::Approx(4.0).epsilon(0.05));
  CHECK((b.phi_raw(2) / sqrt(DD(2.0))).hi == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("C matches ln n to O(1/n)") {
  const BasisTable& b = shared().basis();
  double K = 0.0;
  for (std::int64_t n = 1000; n <= 200'000; n += 1000) {
    K = std::max(K, std::fabs((b.C(n) - DD(std::log(static_cast<double>(n)))).hi) * n);
  }
  CHECK(K < 1.0);
}

TEST_CASE("basis asymptotics report") {
  const VnwAnalysis an(1'000'001);
  const Lemma21Report r = lemma21_check(an.basis(), 100, 1'000'000);
  CHECK(r.kappa.hi == doctest::Approx(1.2533141373155).epsilon(1e-13));
  CHECK(r.phi_error.bounded);
  CHECK(r.anchor_stability <= 1e-6);
}

TEST_CASE("A_n is nilpotent") {
  const VnwAnalysis& an = shared();
  for (const std::int64_t n : {3, 10, 11, 1000, 99'999, 200'000}) {
    const Mat2<DD> A = an.a_matrix(n);
    CHECK(A.trace() == DD(0.0));
    const double scale = max_abs(A);
    CHECK(std::fabs(A.det().hi) <= 1e-14 * scale * scale);
    CHECK(max_abs(A * A) <= 1e-13 * scale * scale);
  }
}

TEST_CASE("closed form of M equals the product") {
  const VnwAnalysis big(1'000'001);
  for (const std::int64_t n : {10, 100, 10'000, 1'000'000}) {
    const Mat2<DD> p = big.m_product(n).entries, c = big.m_closed(n).entries;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(rel(c(i, j), p(i, j)) <= 1e-13);
  }
  for (const std::int64_t n : {10, 1000, 100'000}) {
    const Mat2<DD> m = big.m_product(n).entries;
    CHECK(std::fabs((m.det() - DD(1.0)).hi) <= 1e-13);
  }
}

TEST_CASE("M maps coordinates of a true solution two sites on") {
  // The perturbed equation y(n+1) + y(n-1) + (V0(n) + (-1)^n W_n) y(n) = 2 y(n),
  // run directly in double-double, is the oracle.
  const VnwAnalysis& an = shared();
  const BasisTable& b = an.basis();
  for (const std::int64_t n : {20, 500, 30'000}) {
    DD y0(0.3), y1(-1.1);
    const std::int64_t s = 2 * n - 1;
    const Vec2<DD> d_start = coordinates(b, s, y0, y1);
    for (std::int64_t site = s + 1; site <= s + 2; ++site) {
      const double sg = site % 2 == 0 ? 1.0 : -1.0;
      const DD V = DD(sg) / DD(static_cast<double>(site)) + mul(an.envelope(site), sg);
      const DD y2 = (DD(2.0) - V) * y1 - y0;
      y0 = y1;
      y1 = y2;
    }
    const Vec2<DD> d_end = coordinates(b, s + 2, y0, y1);
    const Mat2<DD> M = an.m_closed(n).entries;
    const Vec2<DD> mapped = M * d_start;
    CHECK(std::fabs(((mapped.x - d_end.x) / d_end.x).hi) <= 1e-20);
    CHECK(std::fabs(((mapped.y - d_end.y) / d_end.y).hi) <= 1e-20);
  }
}

TEST_CASE("eigendata") {
  const VnwAnalysis& an = shared();
  const std::int64_t n0 = determine_n0(an);
  CHECK(n0 >= 50);
  CHECK(n0 < 10'000);
  for (std::int64_t n = n0; n < 100'000; n += 1237) {
    const EigenData e = an.m_eigendata(n);
    CHECK(std::fabs((e.lambda_plus * e.lambda_minus - DD(1.0)).hi) <= 1e-13);
    CHECK(e.lambda_plus > DD(1.0));
    CHECK(e.lambda_minus < DD(1.0));
    CHECK(e.lambda_minus > DD(0.0));
    CHECK(e.b > e.a);
    CHECK(e.a > DD(0.0));
    // v+ = (1, -a) is an eigenvector
    const Mat2<DD> M = an.m_closed(n).entries;
    const Vec2<DD> v = M * Vec2<DD>{DD(1.0), -e.a};
    CHECK(std::fabs(((v.x - e.lambda_plus) / e.lambda_plus).hi) <= 1e-20);
    CHECK(std::fabs(((v.y + e.lambda_plus * e.a) / (e.lambda_plus * e.a)).hi) <= 1e-18);
  }
}

TEST_CASE("tangent recursion against the direct matrix action") {
  const VnwAnalysis& an = shared();
  for (const std::int64_t n : {100, 1000, 10'000, 100'000}) {
    const double ln_n = std::log(static_cast<double>(n));
    for (const double t : {0.0, 1e-3, 1.0 / ln_n}) {
      const EigenData e0 = an.m_eigendata(n), e1 = an.m_eigendata(n + 1);
      // D = v+ + t (a, 1), pushed through M_n and read in the next frame.
      const Vec2<DD> D{DD(1.0) + e0.a * DD(t), DD(t) - e0.a};
      const Vec2<DD> MD = an.m_closed(n).entries * D;
      const DD along = MD.x - e1.a * MD.y;
      const DD across = e1.a * MD.x + MD.y;
      const double want = (across / along).hi;
      const double got = an.prufer_step(DD(t), n).hi;
      CHECK(std::fabs(got - want) <= 1e-12 * std::max(std::fabs(want), 1e-300) + 1e-300);
    }
  }
  const PruferConsistency pc = prufer_consistency(an, 100, 10'000, 1.0 / std::log(100.0));
  CHECK(pc.max_rel_dev <= 1e-12);
}

TEST_CASE("step map is increasing and respects the bound at n = 1000") {
  const VnwAnalysis& an = shared();
  const std::int64_t n = 1000;
  const double top = 1.0 / std::log(static_cast<double>(n));
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = top * i / 100.0;
    const double tn = an.prufer_step(t, n);
    CHECK(tn > prev);
    prev = tn;
  }
  CHECK(prev <= 1.0 / std::log(1001.0));
  const Lemma33Report r = lemma33_check(an, {1000, 5000, 50'000}, 32);
  CHECK(r.ok());
}

TEST_CASE("positivity on the quarter turn") {
  const VnwAnalysis& an = shared();
  for (const double theta : {0.0, M_PI / 2}) {
    const PositivitySigns s = positivity_from_angle(an, theta, 1000);
    CHECK(s.y_odd == 1);
    CHECK(s.y_even == 1);
  }
  const PositivityReport r = positivity_check(an, {1000, 10'000}, 500);
  CHECK(r.violations == 0);
  CHECK(r.trials >= 2 * 500);
}

TEST_CASE("zero-gap statistic on synthetic zeros") {
  // Integer positions round exp(k^2/4); the gap formula holds up to that rounding.
  ZeroRecord quad;
  for (int k = 1; k <= 12; ++k) quad.positions.push_back(std::llround(std::exp(k * k / 4.0)));
  const WindowReport q = zero_gap_fit(quad);
  for (const ZeroGap& g : q.zero_gaps) {
    if (g.k >= 6) CHECK(g.gap == doctest::Approx((2.0 * g.k + 1) / (2.0 * g.k)).epsilon(1e-5));
  }
  CHECK(q.A_est > 0.0);
  CHECK_FALSE(q.decaying);

  ZeroRecord expo;
  for (int k = 1; k <= 30; ++k) expo.positions.push_back(std::llround(std::exp(static_cast<double>(k))));
  const WindowReport e = zero_gap_fit(expo);
  CHECK(e.decaying);
  CHECK(e.zero_gaps.back().gap == doctest::Approx(1.0 / std::sqrt(29.0)).epsilon(1e-6));

  ZeroRecord few;
  few.positions = {3, 10, 50, 200};
  try {
    zero_gap_fit(few);
    FAIL("expected TooFewZeros");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::TooFewZeros);
  }
}

TEST_CASE("window inequality") {
  const WindowInequalityReport r = window_inequality_check({0.01, 0.1, 0.3}, {0.5, 1.0, 1.1}, {5, 10, 50, 200});
  CHECK(r.cases > 0);
  CHECK(r.violations == 0);
}

TEST_CASE("index checks") {
  const VnwAnalysis an(100);
  CHECK_THROWS_AS(an.m_closed(101), Error);
  CHECK_THROWS_AS(an.a_matrix(1), Error);
}
