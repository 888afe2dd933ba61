#include "vnwlab/levinson.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "json.hpp"
#include "vnwlab/compensated.hpp"
#include "vnwlab/errors.hpp"
#include "vnwlab/format.hpp"
#include "vnwlab/potentials.hpp"
#include "vnwlab/recursion.hpp"

namespace vnwlab {

namespace {

inline double parity(std::int64_t n) { return (n & 1) ? -1.0 : 1.0; }  // (-1)^n

inline double cos_quarter(std::int64_t k) {
  static constexpr double table[4] = {1.0, 0.0, -1.0, 0.0};
  return table[((k % 4) + 4) % 4];
}
inline double sin_quarter(std::int64_t k) {
  static constexpr double table[4] = {0.0, 1.0, 0.0, -1.0};
  return table[((k % 4) + 4) % 4];
}

Mat2<double> frame(std::int64_t n) {
  return make_mat2(cos_quarter(n - 1), sin_quarter(n - 1), cos_quarter(n), sin_quarter(n));
}

Mat2<double> inverse(const Mat2<double>& a) {
  const double det = a.det();
  if (det == 0.0) throw Error(ErrorCode::SingularTransform, "singular 2x2 matrix");
  return (1.0 / det) * make_mat2(a(1, 1), -a(0, 1), -a(1, 0), a(0, 0));
}

const Mat2<double> kH = make_mat2(1.0, 1.0, 1.0, -1.0);
const Mat2<double> kJ = make_mat2(0.0, 1.0, -1.0, 0.0);

/// R_n for n in [first, last], computed in double-double and rounded.
std::vector<Mat2<double>> r_sequence(std::int64_t first, std::int64_t last, double c_log) {
  std::vector<Mat2<double>> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t n = first; n <= last; ++n) out.push_back(one_step_model(n, c_log).R);
  return out;
}

std::vector<double> v_sequence(std::int64_t first, std::int64_t last, double c_log) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(last - first + 1));
  for (std::int64_t n = first; n <= last; ++n) out.push_back(v_seq(n, c_log));
  return out;
}

/// ||R_n|| on [10, n_max] and the derived envelope.
struct NormTable {
  std::vector<double> norms;  // norms[n - 10]
  ContractionProfile profile;
};

NormTable norm_table(std::int64_t n_max, double c_log) {
  if (n_max < 40) throw Error(ErrorCode::InvalidParameter, "n_max must be >= 40");
  NormTable t;
  t.profile.n_max = n_max;
  t.norms.reserve(static_cast<std::size_t>(n_max - 9));
  for (std::int64_t n = 10; n <= n_max; ++n) {
    const double r = norm_inf(one_step_model(n, c_log).R);
    t.norms.push_back(r);
    const double scaled = r * static_cast<double>(n) * static_cast<double>(n);
    if (scaled > t.profile.sup_n2_R) {
      t.profile.sup_n2_R = scaled;
      t.profile.argsup = n;
    }
    if (2 * n >= n_max) t.profile.K = std::max(t.profile.K, scaled);
  }
  t.profile.tail_bound = t.profile.K / static_cast<double>(n_max);
  return t;
}

}  // namespace

double v_seq(std::int64_t n, double c_log) {
  if (n < 3) throw Error(ErrorCode::InvalidParameter, "v_n needs n >= 3");
  const double x = static_cast<double>(n);
  return (1.0 + c_log / std::log(x)) / (2.0 * x);
}

LevinsonFrame levinson_frame(std::int64_t n, double c_log) {
  LevinsonFrame f;
  f.n = n;
  f.T = frame(n);
  f.H = kH;
  f.A_osc = (0.5 * parity(n)) * kJ;
  f.v = v_seq(n, c_log);
  return f;
}

Mat2<double> y_step(std::int64_t n, double c_log) {
  return make_mat2(0.0, 1.0, -1.0, -parity(n) * 2.0 * v_seq(n, c_log));
}

Mat2<double> w_step(std::int64_t n, double c_log) {
  const double v = v_seq(n, c_log);
  const double s = parity(n);
  return make_mat2(1.0 - v, -s * v, s * v, 1.0 + v);
}

Mat2<double> w_step_direct(std::int64_t n, double c_log) {
  const Mat2<double> left = inverse(frame(n + 1) * kH);
  return left * y_step(n, c_log) * frame(n) * kH;
}

Mat2<double> u_to_y(std::int64_t n, double c_log) {
  const LevinsonFrame f = levinson_frame(n, c_log);
  return f.T * f.H * (Mat2<double>::identity() + f.v * f.A_osc);
}

ModelStep one_step_model(std::int64_t n, double c_log) {
  if (n < 3) throw Error(ErrorCode::InvalidParameter, "model step needs n >= 3");
  const DD v(v_seq(n, c_log));
  const DD v1(v_seq(n + 1, c_log));
  if (!(v1 < DD(1.0))) throw Error(ErrorCode::InvalidParameter, "model step needs v_{n+1} < 1");
  const DD s(parity(n));
  const DD one(1.0);
  // alpha_m = (-1)^m v_m / 2, so (I + v_m A_m) = I + alpha_m J.
  const DD alpha = mul(s * v, 0.5);
  const DD alpha1 = mul(-(s * v1), 0.5);
  const DD denom = one + alpha1 * alpha1;
  if (!(denom > DD(0.0))) throw Error(ErrorCode::SingularTransform, "1 + v^2 / 4 degenerate");
  const Mat2<DD> right = make_mat2(one, alpha, -alpha, one);
  const Mat2<DD> left = make_mat2(one / denom, -alpha1 / denom, alpha1 / denom, one / denom);
  const Mat2<DD> step = make_mat2(one - v, -(s * v), s * v, one + v);
  const Mat2<DD> G = left * step * right;
  const Mat2<DD> Lambda = make_mat2(one - v, DD(0.0), DD(0.0), one + v);
  ModelStep m;
  m.n = n;
  m.G = to_double(G);
  m.Lambda = to_double(Lambda);
  m.R = to_double(G - Lambda);
  return m;
}

double chain_consistency(const std::vector<std::int64_t>& indices, int trials, std::uint64_t seed, double c_log) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  double worst = 0.0;
  for (const std::int64_t n : indices) {
    const ModelStep m = one_step_model(n, c_log);
    const Mat2<double> F0 = u_to_y(n, c_log);
    const Mat2<double> F1 = u_to_y(n + 1, c_log);
    const Mat2<double> B = y_step(n, c_log);
    for (int t = 0; t < trials; ++t) {
      const Vec2<double> U{unif(rng), unif(rng)};
      const Vec2<double> direct = B * (F0 * U);
      const Vec2<double> chained = F1 * (m.G * U);
      worst = std::max(worst, norm_inf(direct - chained) / norm_inf(direct));
    }
  }
  return worst;
}

ContractionProfile contraction_profile(std::int64_t n_max, double c_log) { return norm_table(n_max, c_log).profile; }

double contraction_at(std::int64_t j0, std::int64_t n_max, double c_log) {
  if (j0 < 10 || j0 > n_max) throw Error(ErrorCode::InvalidParameter, "need 10 <= j0 <= n_max");
  const NormTable t = norm_table(n_max, c_log);
  CompensatedSum sum;
  for (std::size_t i = static_cast<std::size_t>(j0 - 10); i < t.norms.size(); ++i) sum += t.norms[i];
  return (sum.value() + t.profile.tail_bound) / (1.0 - v_seq(j0, c_log));
}

std::int64_t choose_j0(double bound, std::int64_t n_max, double c_log) {
  if (!(bound > 0.0 && bound < 1.0)) throw Error(ErrorCode::InvalidParameter, "contraction bound must lie in (0, 1)");
  const NormTable t = norm_table(n_max, c_log);
  if (!(std::isfinite(t.profile.K) && t.profile.K > 0.0)) {
    throw Error(ErrorCode::CannotSatisfy, "no usable K / n^2 envelope for ||R_n||");
  }
  std::vector<double> suffix(t.norms.size() + 1, 0.0);
  CompensatedSum sum;
  for (std::size_t i = t.norms.size(); i-- > 0;) {
    sum += t.norms[i];
    suffix[i] = sum.value();
  }
  for (std::size_t i = 0; i < t.norms.size(); ++i) {
    const std::int64_t j0 = 10 + static_cast<std::int64_t>(i);
    if ((suffix[i] + t.profile.tail_bound) / (1.0 - v_seq(j0, c_log)) <= bound) return j0;
  }
  throw Error(ErrorCode::CannotSatisfy, "no j0 <= n_max reaches contraction " + fmt_double(bound));
}

CorrectionSolution solve_correction(std::int64_t j0, std::span<const Mat2<double>> R, std::span<const double> v,
                                    double tol) {
  if (R.size() != v.size() || R.empty()) throw Error(ErrorCode::InvalidParameter, "R and v must be non-empty and equal length");
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  const std::size_t len = R.size();
  CorrectionSolution sol;
  sol.j0 = j0;
  sol.n_max = j0 + static_cast<std::int64_t>(len) - 1;
  CompensatedSum total;
  for (const auto& r : R) total += norm_inf(r);
  sol.contraction = total.value() / (1.0 - v[0]);
  if (!(sol.contraction < 1.0)) {
    throw Error(ErrorCode::NotContracting, "measured contraction " + fmt_double(sol.contraction) + " >= 1");
  }
  std::vector<double> q(len), inv(len);
  for (std::size_t i = 0; i < len; ++i) {
    q[i] = (1.0 - v[i]) / (1.0 + v[i]);
    inv[i] = 1.0 / (1.0 - v[i]);
  }
  sol.C.assign(len, Vec2<double>{1.0, 0.0});
  std::vector<Vec2<double>> next(len);
  constexpr int kMaxSweeps = 500;
  for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
    // Backward Horner form of the kernel sum.
    double s1 = 0.0, s2 = 0.0, diff = 0.0;
    for (std::size_t i = len; i-- > 0;) {
      const Vec2<double> r = inv[i] * (R[i] * sol.C[i]);
      s1 += r.x;
      s2 = q[i] * (r.y + s2);
      next[i] = {1.0 - s1, -s2};
      diff = std::max(diff, norm_inf(next[i] - sol.C[i]));
    }
    sol.C.swap(next);
    sol.iterations = sweep;
    if (!sol.diffs.empty() && sol.diffs.back() > 1e-13) sol.max_ratio = std::max(sol.max_ratio, diff / sol.diffs.back());
    sol.diffs.push_back(diff);
    if (diff < tol) return sol;
  }
  throw Error(ErrorCode::NoConvergence, "correction iteration did not reach " + fmt_double(tol));
}

CorrectionSolution solve_correction(std::int64_t j0, std::int64_t n_max, double tol, double c_log) {
  if (j0 < 3 || n_max < j0) throw Error(ErrorCode::InvalidParameter, "need 3 <= j0 <= n_max");
  const auto R = r_sequence(j0, n_max, c_log);
  const auto v = v_sequence(j0, n_max, c_log);
  return solve_correction(j0, R, v, tol);
}

EmbeddedSolution build_embedded(const CorrectionSolution& correction, double c_log) {
  EmbeddedSolution sol;
  sol.j0 = correction.j0;
  sol.n_max = correction.n_max;
  sol.c_log = c_log;
  const std::size_t len = correction.C.size();
  sol.y.resize(len);
  sol.log_p.resize(len);
  sol.residual.assign(len, 0.0);
  std::vector<double> y_prev(len);  // y_{n-1} as seen from Y_n
  CompensatedSum log_p;
  for (std::size_t i = 0; i < len; ++i) {
    const std::int64_t n = sol.j0 + static_cast<std::int64_t>(i);
    sol.log_p[i] = log_p.value();
    const double p = std::exp(sol.log_p[i]);
    const Vec2<double> Y = u_to_y(n, c_log) * (p * correction.C[i]);
    y_prev[i] = Y.x;
    sol.y[i] = Y.y;
    log_p += std::log1p(-v_seq(n, c_log));
  }
  const double scale = sol.y[0];
  if (scale == 0.0) throw Error(ErrorCode::SingularTransform, "y vanishes at j0");
  for (std::size_t i = 0; i < len; ++i) {
    sol.y[i] /= scale;
    y_prev[i] /= scale;
  }
  for (std::size_t i = 1; i < len; ++i) {
    const double ref = std::max(std::fabs(sol.y[i - 1]), std::fabs(y_prev[i]));
    sol.overlap_dev = std::max(sol.overlap_dev, std::fabs(sol.y[i - 1] - y_prev[i]) / ref);
  }
  const PotentialSpec spec = PotentialSpec::log_corrected(c_log);
  for (std::size_t i = 1; i + 1 < len; ++i) {
    const std::int64_t n = sol.j0 + static_cast<std::int64_t>(i);
    const double a = sol.y[i - 1], b = sol.y[i], c = sol.y[i + 1];
    const double scale_n = std::max({std::fabs(a), std::fabs(b), std::fabs(c)});
    sol.residual[i] = std::fabs(c + a + eval_potential(spec, n) * b) / scale_n;
    sol.max_residual = std::max(sol.max_residual, sol.residual[i]);
  }
  return sol;
}

EmbeddedDiagnostics embedded_diagnostics(const EmbeddedSolution& sol, std::int64_t lo) {
  if (lo < sol.j0 || lo * 100 > sol.n_max) throw Error(ErrorCode::InvalidParameter, "need j0 <= lo and 100 lo <= n_max");
  EmbeddedDiagnostics d;
  std::vector<NormalizedSample> decay, logp;
  const auto grid = geometric_grid(lo, sol.n_max);
  for (const std::int64_t n : grid) {
    const double x = static_cast<double>(n);
    const double ln = std::log(x);
    const double y = sol.y_at(n);
    decay.push_back({n, x * ln * ln * y * y});
    const double lp = sol.log_p[static_cast<std::size_t>(n - sol.j0)];
    logp.push_back({n, std::fabs(lp + 0.5 * ln + std::log(ln))});
  }
  // Mid-range reference: the decade centred geometrically in [lo, n_max].
  const double mid = std::sqrt(static_cast<double>(lo) * static_cast<double>(sol.n_max));
  const auto ref_lo = static_cast<std::int64_t>(mid / std::sqrt(10.0));
  const auto ref_hi = static_cast<std::int64_t>(mid * std::sqrt(10.0));
  d.decay = check_bounded("n_ln2n_y2", decay, ref_lo, ref_hi);
  d.log_product = check_bounded("log_product", logp, ref_lo, ref_hi);
  for (std::int64_t n = lo; n <= sol.n_max; ++n) {
    const double x = static_cast<double>(n);
    const double ln = std::log(x);
    const double y = sol.y_at(n);
    const double val = x * ln * ln * y * y;
    if (val > d.sup_decay) {
      d.sup_decay = val;
      d.sup_decay_n = n;
    }
  }
  d.sup_inside = static_cast<double>(d.sup_decay_n) < static_cast<double>(sol.n_max) / std::pow(10.0, 0.25);
  CompensatedSum tail;
  std::size_t next = grid.size();
  for (std::int64_t n = sol.n_max; n >= lo; --n) {
    if (next > 0 && grid[next - 1] == n) {
      --next;
      if (n * 10 <= sol.n_max) {
        const double window = 1.0 / std::log(static_cast<double>(n)) - 1.0 / std::log(static_cast<double>(sol.n_max));
        d.l2_tail.push_back({n, tail.value() / window});
      }
    }
    const double y = sol.y_at(n);
    tail += y * y;
  }
  std::reverse(d.l2_tail.begin(), d.l2_tail.end());
  return d;
}

OracleComparison compare_backward_oracle(const EmbeddedSolution& sol, std::int64_t lo, std::int64_t hi,
                                         std::int64_t norm_site, std::int64_t n_start, double oracle_tol) {
  if (norm_site == 0) norm_site = lo;
  if (lo < sol.j0 || hi > sol.n_max || lo >= hi || norm_site < lo || norm_site > hi) {
    throw Error(ErrorCode::InvalidParameter, "comparison window must lie inside the solution range");
  }
  OracleComparison c;
  c.lo = lo;
  c.hi = hi;
  c.norm_site = norm_site;
  const BackwardSolution back =
      subordinate_backward(PotentialSpec::log_corrected(sol.c_log), 0.0, n_start, lo, hi - lo, oracle_tol);
  c.n_start = back.n_start;
  c.oracle_disagreement = back.disagreement;
  const double ours0 = sol.y_at(norm_site);
  const double theirs0 = back.values[static_cast<std::size_t>(norm_site - lo)];
  for (std::int64_t n = lo; n <= hi; ++n) {
    const double a = sol.y_at(n) / ours0;
    const double b = back.values[static_cast<std::size_t>(n - lo)] / theirs0;
    c.max_rel_dev = std::max(c.max_rel_dev, std::fabs(a - b) / std::fabs(b));
  }
  return c;
}

void write_embedded_csv(std::ostream& out, const EmbeddedSolution& sol, std::int64_t stride) {
  if (stride < 1) throw Error(ErrorCode::InvalidParameter, "stride must be >= 1");
  out << "n,y_n,ln_p_n,residual_n\n";
  const std::size_t len = sol.y.size();
  for (std::size_t i = 0; i < len; ++i) {
    if (i % static_cast<std::size_t>(stride) != 0 && i + 1 != len) continue;
    out << sol.j0 + static_cast<std::int64_t>(i) << ',' << fmt_double(sol.y[i]) << ',' << fmt_double(sol.log_p[i])
        << ',' << fmt_double(sol.residual[i]) << '\n';
  }
}

std::string embedded_summary_json(const CorrectionSolution& correction, const EmbeddedSolution& sol,
                                  const EmbeddedDiagnostics& diag) {
  nlohmann::ordered_json j;
  j["j0"] = sol.j0;
  j["n_max"] = sol.n_max;
  j["contraction"] = correction.contraction;
  j["max_residual"] = sol.max_residual;
  j["sup_n_ln2n_y2"] = diag.sup_decay;
  return j.dump();
}

}  // namespace vnwlab
