#include "vnwlab/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include "vnwlab/eigensolve.hpp"
#include "vnwlab/format.hpp"
#include "vnwlab/levinson.hpp"
#include "vnwlab/potentials.hpp"
#include "vnwlab/recursion.hpp"
#include "vnwlab/stats.hpp"
#include "vnwlab/vnw_analysis.hpp"

namespace vnwlab {

namespace {

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void require(bool ok, const std::string& message) {
  if (!ok) throw Error(ErrorCode::InvalidParameter, message);
}

Json bounded_json(const BoundednessReport& r) {
  Json j;
  j["name"] = r.name;
  j["max"] = r.max_value;
  j["argmax_n"] = r.argmax_n;
  j["reference_median"] = r.reference_median;
  j["bounded"] = r.bounded;
  return j;
}

std::string bounded_detail(const BoundednessReport& r) {
  return "max " + fmt_double(r.max_value) + " at n=" + std::to_string(r.argmax_n) + ", reference median " +
         fmt_double(r.reference_median);
}

}  // namespace

ReportEnvelope run_eig(const EigOptions& opt, std::ostream* csv) {
  require(opt.k_max >= 0, "kmax must be >= 0");
  require(opt.tol > 0.0, "tol must be positive");
  require(opt.N_min >= 1 && opt.N_cap >= opt.N_min, "need 1 <= nmin <= ncap");
  const PotentialSpec spec = parse_potential_selector(opt.potential);
  const Side side = parse_side(opt.side);
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "eig";
  env.config = {{"potential", opt.potential}, {"side", opt.side}, {"kmax", opt.k_max},
                {"tol", opt.tol},             {"nmin", opt.N_min},  {"ncap", opt.N_cap}};
  const auto records = scan_outside(spec, side, opt.k_max, DD(opt.tol), {opt.N_min, opt.N_cap});
  if (csv) write_eigenvalue_csv(*csv, records);
  Json list = Json::array();
  std::size_t converged = 0;
  for (const auto& r : records) {
    list.push_back({{"k", r.k},
                    {"side", to_string(r.side)},
                    {"E_offset", to_string(r.E_offset, 32)},
                    {"d", r.d},
                    {"N_used", r.N_used},
                    {"converged", r.converged},
                    {"localization_warning", r.localization_warning}});
    if (r.converged) ++converged;
  }
  env.result["records"] = std::move(list);
  try {
    env.result["decay_fit"] = Json::parse(decay_fit_json(decay_fit(records)));
  } catch (const Error& e) {
    env.result["decay_fit"] = {{"unavailable", e.what()}};
  }
  env.result["log_distance_concave"] = log_distance_concave(records);
  record_check(env.checks, "converged_records", records.empty() || converged > 0,
               std::to_string(converged) + " of " + std::to_string(records.size()) + " records converged");
  env.wall_time = clock.seconds();
  return env;
}

ReportEnvelope run_zeros(const ZerosOptions& opt, std::ostream* csv) {
  require(opt.N >= 2, "N must be >= 2");
  require(std::isfinite(opt.E), "E must be finite");
  require(opt.k0 >= 1, "k0 must be >= 1");
  const PotentialSpec spec = parse_potential_selector(opt.potential);
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "zeros";
  env.config = {{"potential", opt.potential}, {"E", opt.E}, {"N", opt.N}, {"k0", opt.k0}};
  const ShootResult shot = shoot(spec, opt.E, opt.N, true);
  const ZeroRecord& zeros = *shot.zeros;
  if (csv) write_zero_csv(*csv, zeros);
  env.result["sign_changes"] = shot.state.sign_changes;
  env.result["log_abs_u_N"] = shot.state.log_abs_value();
  Json pos = Json::array();
  for (std::size_t i = 0; i < zeros.positions.size() && i < 64; ++i) pos.push_back(zeros.positions[i]);
  env.result["first_zeros"] = std::move(pos);
  bool fit_ok = false;
  std::string detail;
  try {
    const WindowReport w = zero_gap_fit(zeros, static_cast<std::size_t>(opt.k0));
    env.result["gap_fit"] = {{"A_est", w.A_est},           {"N1", w.N1},
                             {"N2", w.N2},                 {"trend_slope", w.trend_slope},
                             {"decaying", w.decaying},     {"gaps", w.zero_gaps.size()}};
    fit_ok = true;
    detail = "A_est " + fmt_double(w.A_est);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewZeros) throw;
    env.result["gap_fit"] = {{"unavailable", e.what()}};
    detail = e.what();
  }
  record_check(env.checks, "gap_fit", fit_ok, detail);
  env.wall_time = clock.seconds();
  return env;
}

ReportEnvelope run_mn_check(const MnCheckOptions& opt, std::ostream* csv) {
  require(opt.c_log > 1.0, "c_log must be > 1");
  std::vector<std::int64_t> n = opt.n.empty() ? geometric_grid(10, 1'000'000) : opt.n;
  std::int64_t top = 0;
  for (const auto v : n) {
    require(v >= 2, "mn-check indices must be >= 2");
    top = std::max(top, v);
  }
  if (opt.asymptotics) top = std::max<std::int64_t>(top, 1'000'000);
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "mn-check";
  env.config = {{"n", n}, {"c_log", opt.c_log}, {"asymptotics", opt.asymptotics}};
  const VnwAnalysis an(top + 1, opt.c_log);
  const MIdentityReport m = m_identity_check(an, n);
  Json rows = Json::array();
  for (const auto& r : m.rows) {
    rows.push_back({{"n", r.n}, {"max_rel_dev", r.max_rel_dev}, {"det_dev", r.det_dev},
                    {"eig_product_dev", std::isnan(r.eig_product_dev) ? Json(nullptr) : Json(r.eig_product_dev)}});
  }
  env.result["rows"] = std::move(rows);
  env.result["max_rel_dev"] = m.max_rel_dev;
  env.result["max_det_dev"] = m.max_det_dev;
  record_check(env.checks, "closed_equals_product", m.max_rel_dev <= 1e-13, fmt_double(m.max_rel_dev));
  record_check(env.checks, "det_one", m.max_det_dev <= 1e-13, fmt_double(m.max_det_dev));
  if (opt.asymptotics) {
    const Lemma21Report l21 = lemma21_check(an.basis(), 100, 1'000'000);
    env.result["kappa"] = to_string(l21.kappa, 32);
    env.result["phi_error"] = bounded_json(l21.phi_error);
    env.result["c_error"] = bounded_json(l21.c_error);
    env.result["anchor_stability"] = l21.anchor_stability;
    record_check(env.checks, "phi_error_bounded", l21.phi_error.bounded, bounded_detail(l21.phi_error));
    record_check(env.checks, "c_error_bounded", l21.c_error.bounded, bounded_detail(l21.c_error));
    record_check(env.checks, "anchor_stable", l21.anchor_stability <= 1e-6, fmt_double(l21.anchor_stability));
    auto reports = asymptotics_report(an, 100, 1'000'000);
    Json list = Json::array();
    for (const auto& r : reports) {
      list.push_back(bounded_json(r));
      record_check(env.checks, r.name + "_bounded", r.bounded, bounded_detail(r));
    }
    env.result["asymptotics"] = std::move(list);
    if (csv) {
      reports.insert(reports.begin(), {l21.phi_error, l21.c_error});
      write_asymptotic_csv(*csv, reports);
    }
  }
  env.wall_time = clock.seconds();
  return env;
}

ReportEnvelope run_prufer(const PruferOptions& opt, std::ostream* csv) {
  require(opt.c_log > 1.0, "c_log must be > 1");
  require(opt.n_max >= 1000, "nmax must be >= 1000");
  require(opt.random_t >= 0 && opt.angles >= 0, "sample counts must be >= 0");
  require(opt.n_start >= 10 && opt.steps >= 1, "need nstart >= 10 and steps >= 1");
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "prufer";
  env.config = {{"nmax", opt.n_max}, {"c_log", opt.c_log}, {"random_t", opt.random_t}, {"angles", opt.angles},
                {"nstart", opt.n_start}, {"steps", opt.steps}, {"seed", opt.seed}};
  const VnwAnalysis an(std::max(opt.n_max, opt.n_start + opt.steps) + 2, opt.c_log);
  const std::int64_t n0 = determine_n0(an);
  const auto grid = geometric_grid(n0, opt.n_max);
  env.result["n0"] = n0;

  const Lemma33Report l33 = lemma33_check(an, grid, opt.random_t, opt.seed);
  env.result["invariant_region"] = {{"rows", l33.rows.size()},
                           {"upper_violations", l33.upper_violations},
                           {"lower_violations", l33.lower_violations},
                           {"t_next_at_zero_min", l33.t_next_at_zero_min}};
  record_check(env.checks, "step_stays_below_bound", l33.upper_violations == 0,
               std::to_string(l33.upper_violations) + " violations");
  record_check(env.checks, "step_stays_nonnegative", l33.lower_violations == 0,
               std::to_string(l33.lower_violations) + " violations");

  const PositivityReport l32 = positivity_check(an, grid, opt.angles, opt.seed);
  env.result["angle_positivity"] = {{"trials", l32.trials}, {"violations", l32.violations}};
  record_check(env.checks, "positivity_on_quarter_turn", l32.violations == 0,
               std::to_string(l32.violations) + " of " + std::to_string(l32.trials));

  const PruferConsistency pc =
      prufer_consistency(an, opt.n_start, opt.steps, 1.0 / std::log(static_cast<double>(opt.n_start)));
  env.result["consistency"] = {{"n_start", pc.n_start}, {"steps", pc.steps}, {"max_rel_dev", pc.max_rel_dev},
                               {"t_final", pc.t_final}};
  record_check(env.checks, "tangent_recursion_matches_direct", pc.max_rel_dev <= 1e-12, fmt_double(pc.max_rel_dev));

  const RIncrementReport ri = r_increment(an, grid);
  env.result["r_increment"] = {{"C_measured", ri.C_measured}, {"argmax_n", ri.argmax_n}, {"samples", ri.samples}};
  if (csv) {
    *csv << "n,kind,t,t_next,bound\n";
    for (const auto& r : l33.rows) {
      const char* kind = r.kind == Lemma33Report::Kind::Boundary ? "boundary"
                         : r.kind == Lemma33Report::Kind::Zero   ? "zero"
                                                                 : "random";
      *csv << r.n << ',' << kind << ',' << fmt_double(r.t) << ',' << fmt_double(r.t_next) << ','
           << fmt_double(r.bound) << '\n';
    }
  }
  env.wall_time = clock.seconds();
  return env;
}

ReportEnvelope run_embedded(const EmbeddedOptions& opt, std::ostream* csv) {
  require(opt.c_log > 1.0, "c_log must be > 1");
  require(opt.n_max >= 100'000, "nmax must be >= 1e5");
  require(opt.bound > 0.0 && opt.bound < 1.0, "bound must lie in (0, 1)");
  require(opt.tol > 0.0, "tol must be positive");
  require(opt.stride >= 1, "stride must be >= 1");
  require(!opt.oracle || (opt.oracle_lo >= 10 && opt.oracle_lo < opt.oracle_hi && opt.oracle_hi <= opt.n_max),
          "oracle window must satisfy 10 <= lo < hi <= nmax");
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "embedded";
  env.config = {{"nmax", opt.n_max}, {"c_log", opt.c_log},       {"bound", opt.bound},
                {"tol", opt.tol},    {"oracle", opt.oracle},     {"oracle_lo", opt.oracle_lo},
                {"oracle_hi", opt.oracle_hi}, {"stride", opt.stride}};
  const std::int64_t j0 = choose_j0(opt.bound, opt.n_max, opt.c_log);
  const CorrectionSolution cs = solve_correction(j0, opt.n_max, opt.tol, opt.c_log);
  const EmbeddedSolution sol = build_embedded(cs, opt.c_log);
  const EmbeddedDiagnostics diag = embedded_diagnostics(sol);
  const ContractionProfile prof = contraction_profile(opt.n_max, opt.c_log);
  if (csv) write_embedded_csv(*csv, sol, opt.stride);
  env.result["summary"] = Json::parse(embedded_summary_json(cs, sol, diag));
  env.result["iterations"] = cs.iterations;
  env.result["max_ratio"] = cs.max_ratio;
  env.result["sup_n2_R"] = prof.sup_n2_R;
  env.result["K_envelope"] = prof.K;
  env.result["overlap_dev"] = sol.overlap_dev;
  env.result["decay"] = bounded_json(diag.decay);
  env.result["sup_decay_n"] = diag.sup_decay_n;
  env.result["log_product"] = bounded_json(diag.log_product);
  record_check(env.checks, "contraction_below_one", cs.contraction < 1.0, fmt_double(cs.contraction));
  record_check(env.checks, "residual", sol.max_residual <= 1e-10, fmt_double(sol.max_residual));
  record_check(env.checks, "decay_bounded", diag.decay.bounded, bounded_detail(diag.decay));
  record_check(env.checks, "log_product_bounded", diag.log_product.bounded, bounded_detail(diag.log_product));
  if (opt.oracle) {
    const OracleComparison oc = compare_backward_oracle(sol, opt.oracle_lo, opt.oracle_hi);
    env.result["oracle"] = {{"lo", oc.lo},
                            {"hi", oc.hi},
                            {"n_start", oc.n_start},
                            {"oracle_disagreement", oc.oracle_disagreement},
                            {"max_rel_dev", oc.max_rel_dev}};
    record_check(env.checks, "matches_backward_oracle", oc.max_rel_dev <= 1e-6, fmt_double(oc.max_rel_dev));
  }
  env.wall_time = clock.seconds();
  return env;
}

ReportEnvelope run_fit(const FitOptions& opt, std::ostream* csv) {
  require(!opt.input.empty(), "fit needs --input");
  std::ifstream in(opt.input);
  if (!in) throw Error(ErrorCode::InvalidParameter, "cannot open " + opt.input);
  Stopwatch clock;
  ReportEnvelope env;
  env.command = "fit";
  env.config = {{"input", opt.input}};
  const auto records = read_eigenvalue_csv(in);
  env.result["records"] = records.size();
  env.result["log_distance_concave"] = log_distance_concave(records);
  bool ok = false;
  std::string detail;
  try {
    const DecayFit f = decay_fit(records);
    env.result["decay_fit"] = Json::parse(decay_fit_json(f));
    ok = true;
    detail = "slope_p " + fmt_double(f.slope_p);
    if (csv) *csv << decay_fit_json(f) << '\n';
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooFewPoints) throw;
    env.result["decay_fit"] = {{"unavailable", e.what()}};
    detail = e.what();
  }
  record_check(env.checks, "fit_available", ok, detail);
  env.wall_time = clock.seconds();
  return env;
}

}  // namespace vnwlab
