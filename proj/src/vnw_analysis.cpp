#include "vnwlab/vnw_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include "vnwlab/compensated.hpp"
#include "vnwlab/errors.hpp"
#include "vnwlab/format.hpp"

namespace vnwlab {

namespace {

inline DD factor(std::int64_t m) { return DD(static_cast<double>(2 * m)) / DD(static_cast<double>(2 * m - 1)); }

inline double log_factor(std::int64_t m) { return std::log1p(1.0 / static_cast<double>(2 * m - 1)); }

inline double ln(std::int64_t n) { return std::log(static_cast<double>(n)); }

}  // namespace

DD wallis_kappa() { return sqrt(mul(dd_pi(), 0.5)); }

DD anchor_shift_at(std::int64_t n_ref) {
  if (n_ref < 2) throw Error(ErrorCode::InvalidParameter, "anchor site must be >= 2");
  const DD kappa2 = mul(dd_pi(), 0.5);
  // phi at sites k and k + 1; the sum runs over raw C_{k+1} - C_k = kappa^2 / (phi_k phi_{k+1}).
  DD phi_k(1.0), c(0.0);
  for (std::int64_t k = 0; k < n_ref; ++k) {
    const DD phi_next = (k % 2 == 1) ? phi_k * factor((k + 1) / 2) : phi_k;
    c += kappa2 / (phi_k * phi_next);
    phi_k = phi_next;
  }
  return DD(std::log(static_cast<double>(n_ref))) - c;
}

BasisTable::BasisTable(std::int64_t max_n, std::int64_t n_ref) : max_n_(max_n), n_ref_(n_ref) {
  if (max_n < 2) throw Error(ErrorCode::InvalidParameter, "basis table needs max_n >= 2");
  if (n_ref < 2) throw Error(ErrorCode::InvalidParameter, "anchor site must be >= 2");
  kappa_ = wallis_kappa();
  const DD kappa2 = mul(dd_pi(), 0.5);
  const auto size = static_cast<std::size_t>(max_n + 1);
  phi_raw_.resize(size);
  c_.resize(size);
  log_phi_.resize(size);
  phi_raw_[0] = DD(1.0);
  c_[0] = DD(0.0);
  log_phi_[0] = 0.0;
  CompensatedSum log_sum;
  for (std::int64_t k = 1; k <= max_n; ++k) {
    const auto i = static_cast<std::size_t>(k);
    if (k % 2 == 0) {
      phi_raw_[i] = phi_raw_[i - 1] * factor(k / 2);
      log_sum += log_factor(k / 2);
    } else {
      phi_raw_[i] = phi_raw_[i - 1];
    }
    log_phi_[i] = log_sum.value();
    c_[i] = c_[i - 1] + kappa2 / (phi_raw_[i - 1] * phi_raw_[i]);
  }
  if (n_ref <= max_n) {
    shift_ = DD(std::log(static_cast<double>(n_ref))) - c_[static_cast<std::size_t>(n_ref)];
  } else {
    shift_ = anchor_shift_at(n_ref);
  }
  for (auto& v : c_) v += shift_;
}

void BasisTable::check(std::int64_t n) const {
  if (n < 0 || n > max_n_) {
    throw Error(ErrorCode::InvalidParameter,
                "site " + std::to_string(n) + " outside basis table [0, " + std::to_string(max_n_) + "]");
  }
}

DD BasisTable::phi_raw(std::int64_t n) const {
  check(n);
  return phi_raw_[static_cast<std::size_t>(n)];
}

DD BasisTable::phi(std::int64_t n) const { return phi_raw(n) / kappa_; }

DD BasisTable::C(std::int64_t n) const {
  check(n);
  return c_[static_cast<std::size_t>(n)];
}

double BasisTable::log_phi_raw(std::int64_t n) const {
  check(n);
  return log_phi_[static_cast<std::size_t>(n)];
}

UnperturbedBasis BasisTable::at(std::int64_t n) const {
  UnperturbedBasis b;
  b.n = n;
  b.log_phi = log_phi_raw(n);
  b.C = C(n).hi;
  return b;
}

VnwAnalysis::VnwAnalysis(std::int64_t max_index, double c_log, std::int64_t n_ref)
    : max_index_(max_index), c_log_(c_log), basis_(2 * std::max<std::int64_t>(max_index, 2) + 4, n_ref) {
  if (max_index < 2) throw Error(ErrorCode::InvalidParameter, "two-step index range must reach n >= 2");
  if (!(c_log > 1.0)) throw Error(ErrorCode::InvalidParameter, "c_log must exceed 1");
}

void VnwAnalysis::check_index(std::int64_t n) const {
  if (n < 2 || n > max_index_) {
    throw Error(ErrorCode::InvalidParameter,
                "two-step index " + std::to_string(n) + " outside [2, " + std::to_string(max_index_) + "]");
  }
}

DD VnwAnalysis::envelope(std::int64_t site) const { return DD(log_envelope(c_log_, site)); }

Mat2<DD> VnwAnalysis::a_matrix(std::int64_t site) const {
  if (site < 2) throw Error(ErrorCode::InvalidParameter, "A_n needs n >= 2");
  const DD phi = basis_.phi(site);
  const DD c = basis_.C(site);
  DD k = envelope(site) * phi * phi;
  if (site % 2 == 1) k = -k;
  const DD kc = k * c;
  return make_mat2(kc, kc * c, -k, -kc);
}

namespace {

TwoStepMatrix scalars(const VnwAnalysis& an, std::int64_t n) {
  TwoStepMatrix m;
  m.n = n;
  const DD w0 = an.envelope(2 * n);
  const DD w1 = an.envelope(2 * n + 1);
  const DD phi = an.basis().phi(2 * n);
  const DD phi2 = phi * phi;
  m.c = an.basis().C(2 * n);
  m.w = w1;
  m.rho = w0 * w1;
  m.eps = (w0 - w1 + m.rho) * phi2 * m.c;
  m.rho_prime = w1 / (phi2 * m.c);
  return m;
}

}  // namespace

TwoStepMatrix VnwAnalysis::m_product(std::int64_t n) const {
  check_index(n);
  TwoStepMatrix m = scalars(*this, n);
  const auto I = Mat2<DD>::identity();
  m.entries = (I + a_matrix(2 * n + 1)) * (I + a_matrix(2 * n));
  return m;
}

TwoStepMatrix VnwAnalysis::m_closed(std::int64_t n) const {
  check_index(n);
  TwoStepMatrix m = scalars(*this, n);
  const DD one(1.0);
  m.entries = make_mat2(one + m.eps - m.w + m.rho, m.c * (m.eps - mul(m.w, 2.0) + m.rho - m.rho_prime),
                        -(m.eps / m.c), one - m.eps + m.w);
  return m;
}

EigenData VnwAnalysis::m_eigendata(std::int64_t n) const {
  const TwoStepMatrix m = m_closed(n);
  EigenData e;
  e.n = n;
  const DD w2 = m.w * m.w;
  e.radicand = DD(1.0) + m.eps * m.rho_prime / w2 - m.rho / m.w + m.rho * m.rho / mul(w2, 4.0);
  if (!(e.radicand > DD(0.0))) {
    throw Error(ErrorCode::DegenerateEigenvalues, "radicand not positive at n=" + std::to_string(n));
  }
  const DD root = m.w * sqrt(e.radicand);
  const DD base = DD(1.0) + mul(m.rho, 0.5);
  e.lambda_plus = base + root;
  e.lambda_minus = base - root;
  const DD lead = m.eps / m.c;
  e.a = lead / (e.lambda_plus - DD(1.0) + m.eps - m.w);
  e.b = lead / (e.lambda_minus - DD(1.0) + m.eps - m.w);
  return e;
}

PruferCoefficients VnwAnalysis::prufer_coefficients(std::int64_t n) const {
  const TwoStepMatrix m = m_closed(n);
  const EigenData e = m_eigendata(n);
  const EigenData e1 = m_eigendata(n + 1);
  PruferCoefficients p;
  p.n = n;
  p.lambda_plus = e.lambda_plus;
  p.a = e.a;
  p.a_next = e1.a;
  const Vec2<DD> mv = m.entries * Vec2<DD>{e.a, DD(1.0)};
  p.s = p.a_next * mv.x + mv.y;
  p.s_tilde = mv.x - p.a_next * mv.y;
  return p;
}

DD VnwAnalysis::prufer_step(DD t, std::int64_t n) const {
  const PruferCoefficients p = prufer_coefficients(n);
  const DD num = p.s * t + p.lambda_plus * (p.a_next - p.a);
  const DD den = p.s_tilde * t + p.lambda_plus * (DD(1.0) + p.a * p.a_next);
  if (!(den > DD(0.0))) {
    throw Error(ErrorCode::DenominatorVanishes, "tangent recursion denominator not positive at n=" + std::to_string(n));
  }
  return num / den;
}

double VnwAnalysis::prufer_step(double t, std::int64_t n) const {
  const PruferCoefficients p = prufer_coefficients(n);
  const double lam = p.lambda_plus.hi;
  const double num = p.s.hi * t + lam * (p.a_next - p.a).hi;
  const double den = p.s_tilde.hi * t + lam * (1.0 + p.a.hi * p.a_next.hi);
  if (!(den > 0.0)) {
    throw Error(ErrorCode::DenominatorVanishes, "tangent recursion denominator not positive at n=" + std::to_string(n));
  }
  return num / den;
}

Vec2<DD> VnwAnalysis::solution_from_angle(double theta, std::int64_t n) const {
  check_index(n);
  const EigenData e = m_eigendata(n);
  const DD cs(std::cos(theta)), sn(std::sin(theta));
  const DD d1 = cs + e.a * sn;
  const DD d2 = sn - e.a * cs;
  const DD y_odd = basis_.phi(2 * n - 2) * (d1 + basis_.C(2 * n - 1) * d2);
  const DD y_even = basis_.phi(2 * n) * (d1 + basis_.C(2 * n) * d2);
  return {y_odd, y_even};
}

PositivitySigns positivity_from_angle(const VnwAnalysis& an, double theta, std::int64_t n) {
  const Vec2<DD> y = an.solution_from_angle(theta, n);
  return {sign(y.x), sign(y.y)};
}

std::int64_t determine_n0(const VnwAnalysis& an, std::int64_t scan_hi, std::int64_t floor) {
  scan_hi = std::min(scan_hi, an.max_index() - 1);
  std::int64_t last_fail = 0;
  for (std::int64_t n = 2; n <= scan_hi; ++n) {
    bool ok = true;
    try {
      const EigenData e = an.m_eigendata(n);
      if (!(e.a > DD(0.0)) || !(e.b > e.a)) ok = false;
      const PruferCoefficients p = an.prufer_coefficients(n);
      const DD t = DD(1.0 / ln(n));
      const DD one_aa = DD(1.0) + p.a * p.a_next;
      const DD den = p.s_tilde * t + p.lambda_plus * one_aa;
      const DD slope = p.s * one_aa - p.s_tilde * (p.a_next - p.a);
      if (!(den > DD(0.0)) || !(p.lambda_plus * one_aa > DD(0.0)) || !(slope > DD(0.0))) ok = false;
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) last_fail = n;
  }
  return std::max(floor, last_fail + 1);
}

Lemma21Report lemma21_check(const BasisTable& basis, std::int64_t lo, std::int64_t hi, std::int64_t ref_lo,
                            std::int64_t ref_hi, bool strict) {
  if (lo < 1 || hi < lo || 2 * hi > basis.max_n()) {
    throw Error(ErrorCode::InvalidParameter, "lemma21_check range must lie in [1, max_n / 2]");
  }
  Lemma21Report r;
  r.kappa = basis.kappa();
  std::vector<NormalizedSample> phi_q, c_q;
  for (const std::int64_t n : geometric_grid(lo, hi)) {
    const DD root = sqrt(DD(static_cast<double>(2 * n)));
    const DD phi = basis.phi_raw(2 * n);
    phi_q.push_back({n, abs(phi - r.kappa * root).hi * std::sqrt(static_cast<double>(n))});
    r.ratio_deviation.push_back({n, abs(phi / root - r.kappa).hi});
    c_q.push_back({n, abs(basis.C(n) - DD(ln(n))).hi * static_cast<double>(n)});
  }
  r.phi_error = check_bounded("phi_2n_minus_kappa_sqrt_2n_times_sqrt_n", std::move(phi_q), ref_lo, ref_hi);
  r.c_error = check_bounded("C_n_minus_ln_n_times_n", std::move(c_q), ref_lo, ref_hi);
  r.anchor_stability = abs(basis.anchor_shift() - anchor_shift_at(10 * basis.n_ref())).hi;
  if (strict && !r.ok()) {
    const auto& bad = r.phi_error.bounded ? r.c_error : r.phi_error;
    throw Error(ErrorCode::AsymptoticViolation, bad.name + " reaches " + fmt_double(bad.max_value) + " at n=" +
                                                    std::to_string(bad.argmax_n) + ", above 2x median " +
                                                    fmt_double(bad.reference_median));
  }
  return r;
}

std::vector<BoundednessReport> asymptotics_report(const VnwAnalysis& an, std::int64_t lo, std::int64_t hi,
                                                  std::int64_t ref_lo, std::int64_t ref_hi) {
  if (hi + 1 > an.max_index()) throw Error(ErrorCode::InvalidParameter, "asymptotics range exceeds the table");
  std::vector<NormalizedSample> q[11];
  for (const std::int64_t n : geometric_grid(lo, hi)) {
    const double x = static_cast<double>(n);
    const double L = ln(n);
    const double L2n = std::log(2.0 * x);
    const TwoStepMatrix m = an.m_closed(n);
    const EigenData e = an.m_eigendata(n);
    const PruferCoefficients p = an.prufer_coefficients(n);
    const DD one(1.0);
    q[0].push_back({n, std::fabs((mul(m.eps, x) - one).hi) * L});
    q[1].push_back({n, m.rho.hi * x * x * L * L});
    q[2].push_back({n, m.rho_prime.hi * x * x * L * L});
    const DD lam_ref = DD(1.0 / (x * L2n));
    q[3].push_back({n, abs(e.lambda_plus - one - lam_ref).hi * x * x * L});
    q[4].push_back({n, abs(e.lambda_minus - one + lam_ref).hi * x * x * L});
    q[5].push_back({n, abs(e.a - one / m.c + DD(1.0 / (4.0 * x * L * L))).hi * x * L * L * L});
    q[6].push_back({n, abs(p.s - one - p.a * p.a_next).hi * x * L});
    q[7].push_back({n, abs(p.s_tilde - DD(L / x)).hi * x});
    const TwoStepMatrix mp = an.m_product(n);
    q[8].push_back({n, norm_inf(mp.entries - Mat2<DD>::identity()) * x / L});
    q[9].push_back({n, norm_inf(an.a_matrix(2 * n)) / std::log(2.0 * x)});
    q[10].push_back({n, (e.b - e.a).hi * L * L});
  }
  static const char* names[11] = {"eps_n",      "rho_n",    "rho_prime_n",    "lambda_plus", "lambda_minus", "a_n",
                                  "s_n",        "s_tilde_n", "M_minus_I",     "A_norm",      "b_minus_a"};
  std::vector<BoundednessReport> out;
  for (int i = 0; i < 11; ++i) out.push_back(check_bounded(names[i], std::move(q[i]), ref_lo, ref_hi));
  return out;
}

MIdentityReport m_identity_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices) {
  MIdentityReport r;
  for (const std::int64_t n : indices) {
    const TwoStepMatrix a = an.m_closed(n);
    const TwoStepMatrix b = an.m_product(n);
    MIdentityReport::Row row;
    row.n = n;
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double ref = abs(b.entries(i, j)).hi;
        const double dev = abs(a.entries(i, j) - b.entries(i, j)).hi;
        row.max_rel_dev = std::max(row.max_rel_dev, ref > 0.0 ? dev / ref : dev);
      }
    row.det_dev = abs(b.entries.det() - DD(1.0)).hi;
    try {
      const EigenData e = an.m_eigendata(n);
      row.eig_product_dev = abs(e.lambda_plus * e.lambda_minus - DD(1.0)).hi;
    } catch (const Error&) {
      row.eig_product_dev = std::nan("");
    }
    r.max_rel_dev = std::max(r.max_rel_dev, row.max_rel_dev);
    r.max_det_dev = std::max(r.max_det_dev, row.det_dev);
    r.rows.push_back(row);
  }
  return r;
}

Lemma33Report lemma33_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int random_t,
                            std::uint64_t seed) {
  Lemma33Report r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool first_zero = true;
  for (const std::int64_t n : indices) {
    const double top = 1.0 / ln(n);
    const double bound = 1.0 / ln(n + 1);
    auto run = [&](double t, Lemma33Report::Kind kind) {
      Lemma33Report::Row row{n, kind, t, an.prufer_step(DD(t), n).hi, bound};
      if (row.t_next > bound) ++r.upper_violations;
      if (kind == Lemma33Report::Kind::Random && row.t_next < 0.0) ++r.lower_violations;
      if (kind == Lemma33Report::Kind::Zero) {
        r.t_next_at_zero_min = first_zero ? row.t_next : std::min(r.t_next_at_zero_min, row.t_next);
        first_zero = false;
      }
      r.rows.push_back(row);
    };
    run(top, Lemma33Report::Kind::Boundary);
    run(0.0, Lemma33Report::Kind::Zero);
    for (int i = 0; i < random_t; ++i) run(top * unit(rng), Lemma33Report::Kind::Random);
  }
  return r;
}

PositivityReport positivity_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int angles,
                            std::uint64_t seed) {
  PositivityReport r;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi / 2);
  for (const std::int64_t n : indices) {
    for (int i = 0; i < angles + 2; ++i) {
      const double theta = i == 0 ? 0.0 : (i == 1 ? std::numbers::pi / 2 : angle(rng));
      const PositivitySigns s = positivity_from_angle(an, theta, n);
      ++r.trials;
      if (s.y_odd <= 0 || s.y_even <= 0) {
        if (r.violations == 0) {
          r.first_bad_n = n;
          r.first_bad_theta = theta;
        }
        ++r.violations;
      }
    }
  }
  return r;
}

PruferConsistency prufer_consistency(const VnwAnalysis& an, std::int64_t n_start, std::int64_t steps, double t0) {
  PruferConsistency r;
  r.n_start = n_start;
  r.steps = steps;
  DD t(t0);
  EigenData e = an.m_eigendata(n_start);
  Vec2<DD> d{DD(1.0) + t * e.a, t - e.a};  // v+ + t (a, 1)
  for (std::int64_t n = n_start; n < n_start + steps; ++n) {
    t = an.prufer_step(t, n);
    const EigenData e1 = an.m_eigendata(n + 1);
    d = an.m_closed(n).entries * d;
    const double scale = std::max(abs(d.x).hi, abs(d.y).hi);
    d = DD(1.0 / scale) * d;
    const DD t_direct = (e1.a * d.x + d.y) / (d.x - e1.a * d.y);
    const double ref = abs(t_direct).hi;
    const double dev = abs(t - t_direct).hi;
    r.max_rel_dev = std::max(r.max_rel_dev, ref > 0.0 ? dev / ref : dev);
  }
  r.t_final = t.hi;
  return r;
}

RIncrementReport r_increment(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int per_n) {
  RIncrementReport r;
  for (const std::int64_t n : indices) {
    const double L = ln(n);
    const double t_lo = std::pow(L, -1.5), t_hi = 1.0 / L;
    for (int i = 0; i < per_n; ++i) {
      const double f = per_n > 1 ? static_cast<double>(i) / (per_n - 1) : 0.0;
      const double t = t_lo * std::pow(t_hi / t_lo, f);
      const double t1 = an.prufer_step(DD(t), n).hi;
      const double value = (1.0 / t1 - 1.0 / t) * static_cast<double>(n) / L;
      if (r.samples == 0 || value > r.C_measured) {
        r.C_measured = value;
        r.argmax_n = n;
      }
      ++r.samples;
    }
  }
  return r;
}

WindowInequalityReport window_inequality_check(const std::vector<double>& C_values, const std::vector<double>& A_values,
                                               const std::vector<double>& log_N1_values) {
  WindowInequalityReport r;
  for (const double C : C_values)
    for (const double A : A_values) {
      if (!(C > 0.0 && A > 0.0 && 3.0 * A * C < 1.0)) continue;
      const double need = std::max(A, 1.0 / (1.0 - 3.0 * A * C));
      for (const double l1 : log_N1_values) {
        if (std::sqrt(l1) < need) continue;
        for (int i = 0; i <= 16; ++i) {
          const double l2 = l1 + A * std::sqrt(l1) * i / 16.0;
          ++r.cases;
          if (l1 + C * (l2 * l2 - l1 * l1) > std::pow(l2, 1.5) * (1.0 + 1e-14)) ++r.violations;
        }
      }
    }
  return r;
}

WindowReport zero_gap_fit(const ZeroRecord& zeros, std::size_t k0) {
  const auto& z = zeros.positions;
  if (z.size() < 5) {
    throw Error(ErrorCode::TooFewZeros, "gap statistic needs at least 5 zeros, got " + std::to_string(z.size()));
  }
  if (k0 < 1) k0 = 1;
  WindowReport r;
  std::vector<double> lk, lg;
  bool have = false;
  for (std::size_t k = 1; k < z.size(); ++k) {
    const double l0 = std::log(static_cast<double>(z[k - 1]));
    const double l1 = std::log(static_cast<double>(z[k]));
    const double g = l0 > 0.0 ? (l1 - l0) / std::sqrt(l0) : std::nan("");
    r.zero_gaps.push_back({k, z[k - 1], g});
    if (k < k0 || !std::isfinite(g)) continue;
    if (!have || g < r.A_est) {
      r.A_est = g;
      r.N1 = z[k - 1];
      r.N2 = z[k];
      have = true;
    }
    if (g > 0.0) {
      lk.push_back(std::log(static_cast<double>(k)));
      lg.push_back(std::log(g));
    }
  }
  if (!have) throw Error(ErrorCode::TooFewZeros, "no gap beyond k0 is defined");
  if (lk.size() >= 2) {
    r.trend_slope = fit_line(lk, lg).slope;
    r.decaying = r.trend_slope < -0.25;
  }
  return r;
}

void write_asymptotic_csv(std::ostream& out, const std::vector<BoundednessReport>& reports) {
  out << "n,quantity_name,normalized_error\n";
  for (const auto& rep : reports)
    for (const auto& s : rep.samples) out << s.n << ',' << rep.name << ',' << fmt_double(s.value) << '\n';
}

void write_window_csv(std::ostream& out, const WindowReport& report) {
  out << "k,z_k,gap_statistic\n";
  for (const auto& g : report.zero_gaps) out << g.k << ',' << g.z << ',' << fmt_double(g.gap) << '\n';
}

}  // namespace vnwlab
