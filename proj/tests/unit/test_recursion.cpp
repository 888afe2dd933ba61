#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "vnwlab/errors.hpp"
#include "vnwlab/potentials.hpp"
#include "vnwlab/recursion.hpp"

using namespace vnwlab;

namespace {
// Plain three-term recursion in long double, no rescaling.
std::vector<long double> direct(const PotentialSpec& spec, double E, std::int64_t N, long double u0 = 0,
                                long double u1 = 1) {
  std::vector<long double> u(static_cast<std::size_t>(N + 1));
  u[0] = u0;
  u[1] = u1;
  for (std::int64_t n = 1; n < N; ++n) u[n + 1] = (E - eval_potential(spec, n)) * u[n] - u[n - 1];
  return u;
}

std::int64_t direct_changes(const std::vector<long double>& u) {
  std::int64_t count = 0;
  int last = u[1] > 0 ? 1 : -1;
  for (std::size_t n = 2; n < u.size(); ++n) {
    if (u[n] == 0) {
      ++count;
      last = -last;
      ++n;
      continue;
    }
    const int s = u[n] > 0 ? 1 : -1;
    if (s != last) ++count;
    last = s;
  }
  return count;
}
}  // namespace

TEST_CASE("band edge of the free equation is linear") {
  const ShootResult r = shoot(PotentialSpec::zero(), 2.0, 1'000'000, false);
  const double value = r.state.u_curr * std::exp(r.state.log_scale);
  CHECK(std::fabs(value - 1e6) <= 1e-12 * 1e6);
  CHECK(r.state.sign_changes == 0);
}

TEST_CASE("E = 1 gives the period-six pattern") {
  ShootingState s = ShootingState::initial(0.0, 1.0);
  const double want[] = {1, 1, 0, -1, -1, 0, 1, 1, 0};
  for (int i = 0; i < 9; ++i) {
    CHECK(s.u_curr * std::exp(s.log_scale) == doctest::Approx(want[i]).epsilon(1e-15));
    s = step(s, 1.0, PotentialSpec::zero());
  }
  const ShootResult r = shoot(PotentialSpec::zero(), 1.0, 7, true);
  CHECK(r.state.sign_changes == 2);
  REQUIRE(r.zeros);
  CHECK(r.zeros->positions == std::vector<std::int64_t>{3, 6});
  CHECK(count_sign_changes(PotentialSpec::zero(), 1.0, 100) == 33);
}

TEST_CASE("E = 2.5 stays positive and increasing") {
  ShootingState s = ShootingState::initial(0.0, 1.0);
  s = step(s, 2.5, PotentialSpec::zero());
  CHECK(s.u_curr == 2.5);
  s = step(s, 2.5, PotentialSpec::zero());
  CHECK(s.u_curr == 5.25);
  CHECK(count_sign_changes(PotentialSpec::zero(), 2.5, 10'000) == 0);
}

TEST_CASE("counts agree with the unscaled recursion") {
  const auto v = PotentialSpec::log_corrected();
  for (const double E : {-1.7, -0.3, 0.0, 0.9, 1.95}) {
    const auto u = direct(v, E, 3000);
    CHECK(count_sign_changes(v, E, 3000) == direct_changes(u));
  }
}

TEST_CASE("rescaling keeps the value") {
  const ShootResult r = shoot(PotentialSpec::zero(), 3.0, 2000, false);
  // u(n) = (r1^n - r2^n) / (r1 - r2), r1,2 = (3 +- sqrt 5) / 2
  const double r1 = (3.0 + std::sqrt(5.0)) / 2.0;
  const double expected_log = 2000 * std::log(r1) - std::log(std::sqrt(5.0));
  CHECK(r.state.log_abs_value() == doctest::Approx(expected_log).epsilon(1e-12));
  const double m = std::fabs(r.state.u_curr);
  CHECK(m <= std::ldexp(1.0, 512));
  CHECK(m >= std::ldexp(1.0, -512));
}

TEST_CASE("scaling invariance of the initial data") {
  const auto v = PotentialSpec::log_corrected();
  const ShootResult a = shoot_from(v, 0.0, 0.0, 1.0, 100'000, true);
  const ShootResult b = shoot_from(v, 0.0, 0.0, 7.25, 100'000, true);
  CHECK(a.state.sign_changes == b.state.sign_changes);
  CHECK(a.zeros->positions == b.zeros->positions);
  CHECK(b.state.log_abs_value() - a.state.log_abs_value() == doctest::Approx(std::log(7.25)).epsilon(1e-12));
}

TEST_CASE("different initial directions differ by at most one change") {
  const auto v = PotentialSpec::log_corrected();
  const std::int64_t base = shoot_offset(v, -0.5, 50'000, false).state.sign_changes;
  for (const double angle : {0.3, 1.0, 2.0, 2.8}) {
    const std::int64_t c = shoot_from(v, -0.5, std::cos(angle), std::sin(angle), 50'000, false).state.sign_changes;
    CHECK(std::llabs(c - base) <= 1);
  }
}

TEST_CASE("monotone in energy above the band edge") {
  const auto v = PotentialSpec::log_corrected();
  std::int64_t prev = count_sign_changes(v, 2.0, 200'000);
  for (const double E : {2.0001, 2.001, 2.01, 2.1}) {
    const std::int64_t c = count_sign_changes(v, E, 200'000);
    CHECK(c <= prev);
    prev = c;
  }
}

TEST_CASE("sine-lattice solution at an exact free eigenvalue") {
  const std::int64_t N = 99;
  const double k = M_PI / (N + 1);
  const double E = 2.0 * std::cos(k);
  ShootingState s = ShootingState::initial(0.0, 1.0);
  for (std::int64_t n = 1; n < N; ++n) {
    s = step(s, E, PotentialSpec::zero());
    const double want = std::sin((n + 1) * k) / std::sin(k);
    CHECK(std::fabs(s.u_curr * std::exp(s.log_scale) - want) <= 1e-10 * (1.0 / std::sin(k)));
  }
}

TEST_CASE("backward oracle on free characteristic roots") {
  const BackwardSolution b3 = subordinate_backward(PotentialSpec::zero(), 3.0, 2000, 10, 20);
  const double r = (3.0 - std::sqrt(5.0)) / 2.0;
  for (std::size_t i = 1; i < b3.values.size(); ++i) CHECK(std::fabs(b3.values[i] / b3.values[i - 1] - r) <= 1e-10);
  const BackwardSolution b25 = subordinate_backward(PotentialSpec::zero(), 2.5, 2000, 10, 20);
  for (std::size_t i = 1; i < b25.values.size(); ++i) CHECK(std::fabs(b25.values[i] / b25.values[i - 1] - 0.5) <= 1e-12);
  CHECK(b3.values[0] == 1.0);
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(ShootingState::initial(0.0, 0.0), Error);
  CHECK_THROWS_AS(shoot(PotentialSpec::zero(), 2.0, 1, false), Error);
  CHECK_THROWS_AS(subordinate_backward(PotentialSpec::zero(), 3.0, 10, 20, 5), Error);
}

TEST_CASE("zero csv columns") {
  const ShootResult r = shoot(PotentialSpec::zero(), 1.0, 7, true);
  std::ostringstream out;
  write_zero_csv(out, *r.zeros);
  CHECK(out.str().rfind("k,z_k,energy\n1,3,1\n2,6,1\n", 0) == 0);
}
