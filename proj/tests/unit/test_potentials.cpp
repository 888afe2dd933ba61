#include <cfloat>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "vnwlab/errors.hpp"
#include "vnwlab/potentials.hpp"

using namespace vnwlab;

namespace {
// Direct evaluation in long double as the reference.
double reference_v(std::int64_t n, double c) {
  if (n < 3) return 0.0;
  const long double x = static_cast<long double>(n);
  const long double s = (n % 2 == 0) ? 1.0L : -1.0L;
  return static_cast<double>(s / x * (1.0L + c / std::log(x)));
}
}  // namespace

TEST_CASE("log-corrected values") {
  const auto v = PotentialSpec::log_corrected();
  CHECK(eval_potential(v, 1) == 0.0);
  CHECK(eval_potential(v, 2) == 0.0);
  CHECK(eval_potential(v, 3) == doctest::Approx(-0.9401594).epsilon(1e-7));
  CHECK(eval_potential(v, 4) == doctest::Approx(0.6106738).epsilon(1e-7));
  for (std::int64_t n = 3; n < 100'000; n += 37) {
    CHECK(std::fabs(eval_potential(v, n) - reference_v(n, 2.0)) <= 2 * DBL_EPSILON * std::fabs(reference_v(n, 2.0)));
  }
}

TEST_CASE("zero and critical families") {
  CHECK(eval_potential(PotentialSpec::zero(), 17) == 0.0);
  const auto g = PotentialSpec::critical_vnw(1.5);
  CHECK(eval_potential(g, 1) == 0.0);
  CHECK(eval_potential(g, 2) == 0.0);
  CHECK(eval_potential(g, 10) == doctest::Approx(0.15));
  CHECK(eval_potential(g, 11) == doctest::Approx(-1.5 / 11));
}

TEST_CASE("split and recomposition") {
  const auto v = PotentialSpec::log_corrected();
  const VnwSplit s4 = split_vnw(v, 4);
  CHECK(s4.v0 == 0.25);
  CHECK(s4.w == doctest::Approx(0.3606738).epsilon(1e-7));
  const VnwSplit s3 = split_vnw(v, 3);
  CHECK(s3.v0 == doctest::Approx(-1.0 / 3.0));
  CHECK(s3.w == doctest::Approx(0.6068261).epsilon(1e-7));
  CHECK(split_vnw(PotentialSpec::log_corrected(4.0), 3).w == 2.0 * s3.w);
  for (std::int64_t n = 3; n < 50'000; n += 13) {
    const VnwSplit s = split_vnw(v, n);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    const double whole = eval_potential(v, n);
    CHECK(s.v0 + sign * s.w == whole);
    CHECK(s.w == doctest::Approx(2.0 / (n * std::log(static_cast<double>(n)))).epsilon(1e-15));
  }
  CHECK_THROWS_AS(split_vnw(PotentialSpec::zero(), 5), Error);
}

TEST_CASE("blockwise fill agrees with pointwise evaluation") {
  const auto v = PotentialSpec::log_corrected();
  for (const std::int64_t first : {std::int64_t{1}, std::int64_t{1} << 20, std::int64_t{3'000'000'017}}) {
    std::vector<double> out(3000);
    fill_potential(v, first, out);
    for (std::size_t k = 0; k < out.size(); ++k) {
      const double want = eval_potential(v, first + static_cast<std::int64_t>(k));
      CHECK(std::fabs(out[k] - want) <= 2 * DBL_EPSILON * std::fabs(want));
    }
  }
}

TEST_CASE("negation") {
  const auto v = PotentialSpec::log_corrected();
  CHECK(eval_potential(negate(v), 3) == doctest::Approx(0.9401594).epsilon(1e-7));
  CHECK(eval_potential(negate(PotentialSpec::zero()), 9) == 0.0);
  const auto vv = negate(negate(v));
  for (std::int64_t n = 1; n <= 10'000; ++n) CHECK(eval_potential(vv, n) == eval_potential(v, n));
}

TEST_CASE("decay and alternation") {
  const auto v = PotentialSpec::log_corrected();
  for (std::int64_t n = 3; n < 20'000; ++n) {
    const double a = eval_potential(v, n), b = eval_potential(v, n + 1);
    CHECK(a * b < 0.0);
    CHECK(std::fabs(b) < std::fabs(a));
    if (n >= 10) CHECK(std::fabs(n * a) - 1.0 <= 3.0 / std::log(static_cast<double>(n)));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(PotentialSpec::log_corrected(1.0), Error);
  CHECK_THROWS_AS(PotentialSpec::log_corrected(0.5), Error);
  CHECK_THROWS_AS(eval_potential(PotentialSpec::zero(), 0), Error);
  try {
    eval_potential(PotentialSpec::table({1.0, 2.0}), 3);
    FAIL("expected TableOutOfRange");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TableOutOfRange);
  }
}

TEST_CASE("selectors and table files") {
  CHECK(eval_potential(parse_potential_selector("logvnw:2"), 3) == eval_potential(PotentialSpec::log_corrected(), 3));
  CHECK(eval_potential(parse_potential_selector("neg:vnw:2"), 4) == -0.5);
  CHECK_THROWS_AS(parse_potential_selector("bogus"), Error);
  CHECK_THROWS_AS(parse_potential_selector("logvnw:0.5"), Error);

  const auto t = parse_table_text("1.5\n-2\n0.25\n");
  CHECK(eval_potential(t, 2) == -2.0);
  CHECK(eval_potential(negate(t), 3) == -0.25);
  try {
    parse_table_text("1\nabc\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find('2') != std::string::npos);
  }

  const std::string path = "vnwlab_test_table.txt";
  {
    std::ofstream out(path);
    out << "3\n0\n";
  }
  const auto f = parse_potential_selector("table:" + path);
  CHECK(eval_potential(f, 1) == 3.0);
  std::remove(path.c_str());
}
