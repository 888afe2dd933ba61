#include "vnwlab/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>

#include "vnwlab/commands.hpp"
#include "vnwlab/eigensolve.hpp"
#include "vnwlab/format.hpp"
#include "vnwlab/levinson.hpp"
#include "vnwlab/potentials.hpp"
#include "vnwlab/recursion.hpp"
#include "vnwlab/vnw_analysis.hpp"

namespace vnwlab {

namespace {

struct Outcome {
  bool ok = false;
  std::string detail;
};

using Check = std::function<Outcome()>;

bool close(double a, double b, double rel) { return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b)); }

Outcome expect_value(double got, double want, double rel) {
  return {close(got, want, rel), "got " + fmt_double(got) + ", want " + fmt_double(want)};
}

template <typename F>
Outcome expect_error(ErrorCode code, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return {e.code() == code, std::string("raised ") + to_string(e.code())};
  }
  return {false, "no error raised"};
}

}  // namespace

std::vector<CheckResult> selftest_checks(int threads) {
  const PotentialSpec logv = PotentialSpec::log_corrected(2.0);
  const PotentialSpec zero = PotentialSpec::zero();
  std::vector<std::pair<std::string, Check>> list;
  auto add = [&](std::string name, Check c) { list.emplace_back(std::move(name), std::move(c)); };

  // potentials
  add("potentials.logvnw_vanishes_at_1_2", [&] {
    return Outcome{eval_potential(logv, 1) == 0.0 && eval_potential(logv, 2) == 0.0, ""};
  });
  add("potentials.logvnw_n3", [&] { return expect_value(eval_potential(logv, 3), -(1.0 + 2.0 / std::log(3.0)) / 3.0, 1e-15); });
  add("potentials.logvnw_n4", [&] { return expect_value(eval_potential(logv, 4), (1.0 + 2.0 / std::log(4.0)) / 4.0, 1e-15); });
  add("potentials.zero_n17", [&] { return Outcome{eval_potential(zero, 17) == 0.0, ""}; });
  add("potentials.split_n4", [&] {
    const VnwSplit s = split_vnw(logv, 4);
    return Outcome{s.v0 == 0.25 && close(s.w, 2.0 / (4.0 * std::log(4.0)), 1e-15) &&
                       close(s.v0 + s.w, eval_potential(logv, 4), 2e-16),
                   "w=" + fmt_double(s.w)};
  });
  add("potentials.split_c4_doubles_w", [&] {
    const VnwSplit a = split_vnw(logv, 3), b = split_vnw(PotentialSpec::log_corrected(4.0), 3);
    return Outcome{b.w == 2.0 * a.w, fmt_double(b.w)};
  });
  add("potentials.negate_involution", [&] {
    const PotentialSpec twice = negate(negate(logv));
    for (std::int64_t n = 1; n <= 10'000; ++n)
      if (eval_potential(twice, n) != eval_potential(logv, n)) return Outcome{false, "n=" + std::to_string(n)};
    return Outcome{eval_potential(negate(logv), 3) == -eval_potential(logv, 3), ""};
  });
  add("potentials.rejects_c_log_le_1", [&] {
    return expect_error(ErrorCode::InvalidParameter, [] { PotentialSpec::log_corrected(1.0); });
  });
  add("potentials.decay_and_alternation", [&] {
    for (std::int64_t n = 10; n <= 100'000; ++n) {
      const double v = eval_potential(logv, n);
      if (std::fabs(n * std::fabs(v) - 1.0) > 3.0 / std::log(static_cast<double>(n)) ||
          v * eval_potential(logv, n + 1) >= 0.0 || std::fabs(eval_potential(logv, n + 1)) >= std::fabs(v)) {
        return Outcome{false, "n=" + std::to_string(n)};
      }
    }
    return Outcome{true, ""};
  });

  // recursion
  add("recursion.free_band_edge_linear", [&] {
    for (const std::int64_t N : {10, 1000, 1'000'000}) {
      const ShootingState s = shoot(zero, 2.0, N, false).state;
      const double u = s.u_curr * std::exp(s.log_scale);
      if (!close(u, static_cast<double>(N), 1e-12)) return Outcome{false, "N=" + std::to_string(N)};
    }
    return Outcome{true, ""};
  });
  add("recursion.free_E1_period6", [&] {
    const ShootResult r = shoot(zero, 1.0, 7, true);
    const auto& z = r.zeros->positions;
    return Outcome{r.state.sign_changes == 2 && z.size() == 2 && z[0] == 3 && z[1] == 6,
                   std::to_string(r.state.sign_changes) + " changes"};
  });
  add("recursion.free_E2.5_positive", [&] {
    ShootingState s = ShootingState::initial(0.0, 1.0);
    s = step(s, 2.5, zero);
    const bool a = s.u_curr == 2.5;
    s = step(s, 2.5, zero);
    return Outcome{a && s.u_curr == 5.25 && count_sign_changes(zero, 2.5, 10'000) == 0, ""};
  });
  add("recursion.scaling_invariance", [&] {
    const ShootResult a = shoot_from(logv, 0.0, 0.0, 1.0, 100'000, true);
    const ShootResult b = shoot_from(logv, 0.0, 0.0, 8.0, 100'000, true);
    return Outcome{a.zeros->positions == b.zeros->positions &&
                       close(b.state.log_abs_value() - a.state.log_abs_value(), std::log(8.0), 1e-12),
                   ""};
  });
  add("recursion.backward_free_E3", [&] {
    const BackwardSolution b = subordinate_backward(zero, 3.0, 2000, 1, 20);
    const double r = (3.0 - std::sqrt(5.0)) / 2.0;
    double worst = 0.0;
    for (std::size_t i = 1; i < b.values.size(); ++i) worst = std::max(worst, std::fabs(b.values[i] / b.values[i - 1] - r));
    return Outcome{worst <= 1e-10, fmt_double(worst)};
  });
  add("recursion.backward_free_E2.5", [&] {
    const BackwardSolution b = subordinate_backward(zero, 2.5, 2000, 1, 20);
    double worst = 0.0;
    for (std::size_t i = 1; i < b.values.size(); ++i) worst = std::max(worst, std::fabs(b.values[i] / b.values[i - 1] - 0.5));
    return Outcome{worst <= 1e-10, fmt_double(worst)};
  });

  // ddreal
  add("ddreal.exact_pair", [&] {
    const DD s = DD(1.0) + DD(std::ldexp(1.0, -60));
    return Outcome{s.hi == 1.0 && s.lo == std::ldexp(1.0, -60), ""};
  });
  add("ddreal.two_sum_residual", [&] {
    const DD s = DD(0.1) + DD(0.2);
    double err = 0.0;
    const double hi = eft::two_sum(0.1, 0.2, err);
    return Outcome{s.hi == hi && s.lo == err && s.hi == 0.1 + 0.2, fmt_double(s.lo)};
  });
  add("ddreal.square_expansion", [&] {
    const DD x = DD(1.0) + DD(std::ldexp(1.0, -30));
    const DD s = x * x;
    return Outcome{s.hi == 1.0 + std::ldexp(1.0, -29) && s.lo == std::ldexp(1.0, -60), ""};
  });
  add("ddreal.cancel_and_divide", [&] {
    const DD a = DD::from_sum(1.2345678901234567, 3.1e-17);
    return Outcome{(a - a) == DD(0.0) && (a / a) == DD(1.0), ""};
  });
  add("ddreal.ordering", [&] {
    const DD one_up = DD::from_sum(1.0, std::ldexp(1.0, -60));
    const DD two_down = DD::from_sum(2.0, -std::ldexp(1.0, -60));
    return Outcome{one_up > DD(1.0) && two_down < DD(2.0), ""};
  });
  add("ddreal.decimal_round_trip", [&] {
    const DD x = DD(1.0) / DD(3.0);
    const DD y = parse_dd(to_string(x, 32));
    return Outcome{abs(x - y).hi <= 1e-31, to_string(x, 32)};
  });

  // vnw_analysis
  add("basis.phi_small_values", [&] {
    const BasisTable b(16);
    return Outcome{b.phi_raw(0) == DD(1.0) && b.phi_raw(1) == DD(1.0) && b.phi_raw(2) == DD(2.0) &&
                       b.phi_raw(3) == DD(2.0) && abs(b.phi_raw(4) - DD(8.0) / DD(3.0)).hi < 1e-31 &&
                       b.phi_raw(5) == b.phi_raw(4),
                   ""};
  });
  add("basis.wronskian_n100", [&] {
    const BasisTable b(200);
    const DD w = b.phi(100) * b.phi(101) * (b.C(101) - b.C(100));
    return Outcome{std::fabs(w.hi - 1.0) <= 1e-12, fmt_double(w.hi)};
  });
  add("basis.kappa_wallis", [&] {
    const BasisTable b(20'000);
    const double r = (b.phi_raw(20'000) / sqrt(DD(20'000.0))).hi;
    return Outcome{std::fabs(r - 1.2533141373155) <= 1e-4, fmt_double(r)};
  });
  add("analysis.a_matrix_nilpotent", [&] {
    const VnwAnalysis an(600);
    double worst = 0.0;
    for (const std::int64_t n : {3, 10, 100, 1000}) {
      const Mat2<DD> A = an.a_matrix(n);
      const double scale = norm_inf(A) * norm_inf(A);
      worst = std::max({worst, abs(A.trace()).hi, abs(A.det()).hi / scale, norm_inf(A * A) / scale});
    }
    return Outcome{worst <= 1e-14, fmt_double(worst)};
  });
  add("analysis.m_closed_equals_product", [&] {
    const VnwAnalysis an(10'001);
    const MIdentityReport m = m_identity_check(an, {10, 100, 10'000});
    return Outcome{m.max_rel_dev <= 1e-13 && m.max_det_dev <= 1e-13, fmt_double(m.max_rel_dev)};
  });
  add("analysis.eigenvalue_product_one", [&] {
    const VnwAnalysis an(10'001);
    double worst = 0.0;
    for (const std::int64_t n : {100, 1000, 10'000}) {
      const EigenData e = an.m_eigendata(n);
      worst = std::max(worst, abs(e.lambda_plus * e.lambda_minus - DD(1.0)).hi);
      if (!(e.b > e.a && e.a > DD(0.0))) return Outcome{false, "ordering at n=" + std::to_string(n)};
    }
    return Outcome{worst <= 1e-13, fmt_double(worst)};
  });
  add("analysis.step_boundary_n1000", [&] {
    const VnwAnalysis an(1001);
    const double t = an.prufer_step(1.0 / std::log(1000.0), 1000);
    return Outcome{t >= 0.0 && t <= 1.0 / std::log(1001.0), fmt_double(t)};
  });
  add("analysis.positivity_endpoints_n1000", [&] {
    const VnwAnalysis an(1001);
    const PositivitySigns a = positivity_from_angle(an, 0.0, 1000);
    const PositivitySigns b = positivity_from_angle(an, std::numbers::pi / 2, 1000);
    return Outcome{a.y_odd > 0 && a.y_even > 0 && b.y_odd > 0 && b.y_even > 0, ""};
  });
  add("analysis.gap_fit_quadratic_synthetic", [&] {
    ZeroRecord z;
    for (int k = 1; k <= 12; ++k) z.positions.push_back(std::llround(std::exp(k * k / 4.0)));
    const WindowReport w = zero_gap_fit(z);
    const auto& g = w.zero_gaps.back();
    const double want = (2.0 * g.k + 1.0) / (2.0 * g.k);
    return Outcome{std::fabs(g.gap - want) <= 1e-9 && !w.decaying, fmt_double(g.gap)};
  });
  add("analysis.gap_fit_exponential_synthetic", [&] {
    ZeroRecord z;
    for (int k = 1; k <= 40; ++k) z.positions.push_back(std::llround(std::exp(static_cast<double>(k))));
    const WindowReport w = zero_gap_fit(z);
    return Outcome{w.decaying, "trend " + fmt_double(w.trend_slope)};
  });
  add("analysis.window_inequality", [&] {
    const WindowInequalityReport r =
        window_inequality_check({0.01, 0.1, 0.3}, {0.5, 1.0, 1.1}, {5.0, 10.0, 50.0, 200.0});
    return Outcome{r.cases > 0 && r.violations == 0, std::to_string(r.cases) + " cases"};
  });

  // eigensolve
  add("eigensolve.free_N3_count", [&] {
    return Outcome{sturm_count_below(TruncatedOperator(zero, 3), DD(1.0)) == 2, ""};
  });
  add("eigensolve.free_count_below_zero", [&] {
    for (const std::int64_t N : {1, 2, 3, 10, 101, 1000})
      if (sturm_count_below(TruncatedOperator(zero, N), DD(0.0)) != N / 2) return Outcome{false, "N=" + std::to_string(N)};
    return Outcome{true, ""};
  });
  add("eigensolve.free_has_no_outside_eigenvalue", [&] {
    return expect_error(ErrorCode::NoSuchEigenvalue,
                        [&] { eigenvalue_k(TruncatedOperator(zero, 100), Side::Above, 0, DD(1e-12)); });
  });
  add("eigensolve.single_site_model", [&] {
    std::vector<double> site(4096, 0.0);
    site[0] = 3.0;
    const EigenvalueRecord r = converge_in_N(PotentialSpec::table(site), Side::Above, 0, DD(1e-12), ConvergenceOptions{32, 2048});
    return Outcome{r.converged && std::fabs((r.E_offset - DD(4.0) / DD(3.0)).hi) <= 1e-12,
                   to_string(r.E_offset, 20)};
  });
  add("eigensolve.negation_mirror", [&] {
    const EigenvalueRecord a = converge_in_N(logv, Side::Above, 0, DD(1e-14));
    const EigenvalueRecord b = converge_in_N(negate(logv), Side::Below, 0, DD(1e-14));
    return Outcome{std::fabs((a.E_offset + b.E_offset).hi) <= 1e-12, to_string(a.E_offset, 20)};
  });
  add("eigensolve.oscillation_crosscheck", [&] {
    for (const double d : {1e-2, 1e-3})
      if (!oscillation_crosscheck(logv, d).agree) return Outcome{false, "d=" + fmt_double(d)};
    return Outcome{true, ""};
  });
  add("eigensolve.dd_and_double_counts_agree", [&] {
    const TruncatedOperator op(logv, 500);
    const auto spec = truncation_spectrum(op, threads);
    for (double E = -3.0; E <= 3.0; E += 0.0137) {
      bool near = false;
      for (const double l : spec) near = near || std::fabs(l - E) < 1e-10;
      if (!near && sturm_count_below(op, DD(E)) != sturm_count_below(op, E)) return Outcome{false, "E=" + fmt_double(E)};
    }
    return Outcome{true, ""};
  });
  add("eigensolve.spectrum_symmetry_N200", [&] {
    const auto a = truncation_spectrum(TruncatedOperator(logv, 200), threads);
    const auto b = truncation_spectrum(TruncatedOperator(negate(logv), 200), threads);
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::fabs(a[i] + b[b.size() - 1 - i]));
    return Outcome{worst <= 1e-12, fmt_double(worst)};
  });
  add("eigensolve.decay_fit_exponential_baseline", [&] {
    std::vector<EigenvalueRecord> recs;
    for (int k = 1; k <= 6; ++k) {
      EigenvalueRecord r;
      r.k = k;
      r.d = std::exp(-3.0 * k);
      r.converged = true;
      recs.push_back(r);
    }
    const DecayFit f = decay_fit(recs);
    return Outcome{std::fabs(f.slope_p - 1.0) <= 1e-12, fmt_double(f.slope_p)};
  });

  // levinson
  add("levinson.v_values", [&] {
    return Outcome{close(v_seq(3), (1.0 + 2.0 / std::log(3.0)) / 6.0, 1e-15) &&
                       close(2.0 * v_seq(4), std::fabs(eval_potential(logv, 4)), 2.3e-16),
                   fmt_double(v_seq(3))};
  });
  add("levinson.w_step_closed_form", [&] {
    double worst = 0.0;
    for (const std::int64_t n : {3, 4, 5, 6, 1001, 1002})
      worst = std::max(worst, norm_inf(w_step(n) - w_step_direct(n)));
    return Outcome{worst <= 1e-15, fmt_double(worst)};
  });
  add("levinson.chain_consistency", [&] {
    const double d = chain_consistency({10, 1000, 100'000});
    return Outcome{d <= 1e-13, fmt_double(d)};
  });
  add("levinson.zero_kernel_fixed_point", [&] {
    const std::vector<Mat2<double>> R(100);
    std::vector<double> v(100);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = v_seq(static_cast<std::int64_t>(i) + 10);
    const CorrectionSolution c = solve_correction(10, R, v);
    bool ok = c.iterations == 1;
    for (const auto& x : c.C) ok = ok && x.x == 1.0 && x.y == 0.0;
    return Outcome{ok, std::to_string(c.iterations) + " sweeps"};
  });
  add("levinson.embedded_residual_1e5", [&] {
    const std::int64_t j0 = choose_j0(0.5, 100'000);
    const CorrectionSolution c = solve_correction(j0, 100'000);
    const EmbeddedSolution e = build_embedded(c);
    return Outcome{c.contraction < 0.5 && c.max_ratio <= c.contraction + 0.05 && e.max_residual <= 1e-10,
                   "residual " + fmt_double(e.max_residual)};
  });

  std::vector<CheckResult> out;
  for (auto& [name, fn] : list) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    out.push_back({name, o.ok, o.detail});
  }
  return out;
}

ReportEnvelope run_selftest(const SelftestOptions& opt, std::ostream* csv) {
  if (opt.threads < 1) throw Error(ErrorCode::InvalidParameter, "threads must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  ReportEnvelope env;
  env.command = "selftest";
  env.config = {{"threads", opt.threads}};
  env.checks = selftest_checks(opt.threads);
  std::size_t passed = 0;
  for (const auto& c : env.checks) passed += c.passed ? 1 : 0;
  env.result["passed"] = passed;
  env.result["total"] = env.checks.size();
  if (csv) {
    *csv << "check,passed,detail\n";
    for (const auto& c : env.checks) {
      std::string detail = c.detail;
      for (char& ch : detail)
        if (ch == ',' || ch == '\n') ch = ';';
      *csv << c.name << ',' << (c.passed ? "true" : "false") << ',' << detail << '\n';
    }
  }
  env.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return env;
}

}  // namespace vnwlab
