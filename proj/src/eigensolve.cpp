#include "vnwlab/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "vnwlab/errors.hpp"
#include "vnwlab/format.hpp"
#include "vnwlab/recursion.hpp"
#include "vnwlab/stats.hpp"

namespace vnwlab {

namespace {

const double kTiny = std::ldexp(1.0, -100);

constexpr int kBandExp = 512;

/// DD + double with one renormalization.
inline DD add(DD a, double b) noexcept {
  double e = 0.0;
  const double s = eft::two_sum(a.hi, b, e);
  return DD::from_sum(s, e + a.lo);
}

/// Eigenvalues of H strictly above 2 + x (Above) or of -H strictly above
/// 2 + x, i.e. of H strictly below -2 - x (Below). Counts sign changes of the
/// leading minors u(1..N+1) in difference form; an exact zero at N + 1 means
/// 2 + x is itself an eigenvalue and is not counted.
std::int64_t count_beyond(const TruncatedOperator& op, Side side, DD x) {
  const auto v = op.diagonal();
  const double sgn = side == Side::Above ? 1.0 : -1.0;
  const double band_hi = std::ldexp(1.0, kBandExp);
  const double band_lo = std::ldexp(1.0, -kBandExp);
  DD u(1.0), slope(1.0);
  int last = 1;
  std::int64_t count = 0;
  const std::size_t n = v.size();
  for (std::size_t k = 0; k < n; ++k) {
    slope += add(x, -sgn * v[k]) * u;
    u += slope;
    if (u.hi == 0.0) {
      if (k + 1 < n) {
        ++count;
        last = -last;
      }
      continue;
    }
    if ((u.hi > 0.0 ? 1 : -1) != last) {
      ++count;
      last = -last;
    }
    const double m = std::max(std::fabs(u.hi), std::fabs(slope.hi));
    if (m > band_hi || m < band_lo) {
      int e = 0;
      std::frexp(m, &e);
      u = DD::from_sum(std::ldexp(u.hi, -e), std::ldexp(u.lo, -e));
      slope = DD::from_sum(std::ldexp(slope.hi, -e), std::ldexp(slope.lo, -e));
    }
  }
  return count;
}

/// Shrinks [lo, hi] with count(lo) >= need > count(hi) until hi - lo <= tol.
void bisect(const TruncatedOperator& op, Side side, std::int64_t need, DD& lo, DD& hi, DD tol) {
  while (hi - lo > tol) {
    const DD mid = lo + mul(hi - lo, 0.5);
    if (!(mid > lo) || !(mid < hi)) break;
    if (count_beyond(op, side, mid) >= need) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
}

EigenvalueRecord make_record(const TruncatedOperator& op, Side side, int k, DD lo, DD hi) {
  EigenvalueRecord r;
  r.k = k;
  r.side = side;
  const DD x = lo + mul(hi - lo, 0.5);
  r.E_offset = side == Side::Above ? x : -x;
  r.d = x.hi;
  r.N_used = op.N();
  r.localization_warning = 1.0 / std::sqrt(r.d) > 0.25 * static_cast<double>(op.N());
  return r;
}

/// eigenvalue_k, but first tries the bracket [hint, 2 hint] (hint > 0): the
/// offsets grow with N, so the previous truncation's value is a good guess.
EigenvalueRecord eigenvalue_hinted(const TruncatedOperator& op, Side side, int k, DD tol, DD hint) {
  const std::int64_t need = static_cast<std::int64_t>(k) + 1;
  DD lo = hint - tol, hi = mul(hint, 2.0);
  if (lo > DD(0.0) && count_beyond(op, side, lo) >= need) {
    while (count_beyond(op, side, hi) >= need) {
      lo = hi;
      hi = mul(hi, 2.0);
      if (hi.hi > op.sup_norm() + 2.0) return eigenvalue_k(op, side, k, tol);
    }
    bisect(op, side, need, lo, hi, tol);
    return make_record(op, side, k, lo, hi);
  }
  return eigenvalue_k(op, side, k, tol);
}

}  // namespace

const char* to_string(Side side) noexcept { return side == Side::Above ? "above" : "below"; }

Side parse_side(std::string_view text) {
  if (text == "above") return Side::Above;
  if (text == "below") return Side::Below;
  throw Error(ErrorCode::InvalidParameter, "side must be 'above' or 'below', got '" + std::string(text) + "'");
}

TruncatedOperator::TruncatedOperator(PotentialSpec spec, std::int64_t N) : spec_(std::move(spec)), N_(N) {
  if (N < 1) throw Error(ErrorCode::InvalidParameter, "truncation size must be >= 1");
  diag_.resize(static_cast<std::size_t>(N));
  fill_potential(spec_, 1, diag_);
  for (const double v : diag_) sup_ = std::max(sup_, std::fabs(v));
}

std::int64_t sturm_count_below(const TruncatedOperator& op, DD E) {
  const auto v = op.diagonal();
  std::int64_t count = 0;
  DD delta;
  for (std::size_t k = 0; k < v.size(); ++k) {
    delta = k == 0 ? DD(v[0]) - E : DD(v[k]) - E - DD(1.0) / delta;
    if (delta.hi == 0.0) delta = DD(kTiny);
    if (delta.hi < 0.0) ++count;
  }
  return count;
}

std::int64_t sturm_count_below(const TruncatedOperator& op, double E) {
  const auto v = op.diagonal();
  std::int64_t count = 0;
  double delta = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    delta = k == 0 ? v[0] - E : v[k] - E - 1.0 / delta;
    if (delta == 0.0) delta = kTiny;
    if (delta < 0.0) ++count;
  }
  return count;
}

std::int64_t count_above_offset(const TruncatedOperator& op, DD e) { return count_beyond(op, Side::Above, e); }

EigenvalueRecord eigenvalue_k(const TruncatedOperator& op, Side side, int k, DD tol) {
  if (k < 0) throw Error(ErrorCode::InvalidParameter, "eigenvalue index must be >= 0");
  if (!(tol > DD(0.0))) throw Error(ErrorCode::InvalidParameter, "bisection tolerance must be positive");
  const std::int64_t need = static_cast<std::int64_t>(k) + 1;
  const std::int64_t available = count_beyond(op, side, DD(0.0));
  if (available < need) {
    throw Error(ErrorCode::NoSuchEigenvalue, "only " + std::to_string(available) + " eigenvalues " +
                                                 to_string(side) + " the band at N=" + std::to_string(op.N()) +
                                                 ", index " + std::to_string(k) + " requested");
  }
  // Invariant: count(lo) >= k + 1 > count(hi).
  DD hi(op.sup_norm() + 2.0);
  DD lo(0.0);
  for (int i = 0; i < 2200; ++i) {
    const DD half = mul(hi, 0.5);
    if (count_beyond(op, side, half) >= need) {
      lo = half;
      break;
    }
    hi = half;
  }
  bisect(op, side, need, lo, hi, tol);
  return make_record(op, side, k, lo, hi);
}

EigenvalueRecord converge_in_N(const PotentialSpec& spec, Side side, int k, DD tol, const ConvergenceOptions& opt) {
  if (opt.N_min < 1 || opt.N_cap < opt.N_min) throw Error(ErrorCode::InvalidParameter, "need 1 <= N_min <= N_cap");
  const DD bisect_tol = mul(tol, 1.0 / 16.0);
  std::optional<EigenvalueRecord> prev;
  for (std::int64_t N = opt.N_min;; N = std::min(2 * N, opt.N_cap)) {
    const TruncatedOperator op(spec, N);
    try {
      EigenvalueRecord rec = prev ? eigenvalue_hinted(op, side, k, bisect_tol, abs(prev->E_offset))
                                  : eigenvalue_k(op, side, k, bisect_tol);
      if (prev && abs(rec.E_offset - prev->E_offset) < tol) {
        rec.converged = true;
        return rec;
      }
      prev = rec;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoSuchEigenvalue || N >= opt.N_cap) throw;
    }
    if (N >= opt.N_cap) break;
  }
  prev->converged = false;
  return *prev;
}

std::vector<EigenvalueRecord> scan_outside(const PotentialSpec& spec, Side side, int k_max, DD tol,
                                           const ConvergenceOptions& opt) {
  std::vector<EigenvalueRecord> out;
  for (int k = 0; k <= k_max; ++k) {
    try {
      out.push_back(converge_in_N(spec, side, k, tol, opt));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::NoSuchEigenvalue) break;
      throw;
    }
    if (!out.back().converged) break;
  }
  return out;
}

OscillationCheck oscillation_crosscheck(const PotentialSpec& spec, double d) {
  if (!(d > 0.0 && d < 0.5)) throw Error(ErrorCode::InvalidParameter, "crosscheck needs 0 < d < 1/2");
  OscillationCheck r;
  r.d = d;
  r.N = static_cast<std::int64_t>(std::ceil(10.0 / d));
  const TruncatedOperator op(spec, r.N);
  r.sturm_count = count_above_offset(op, DD(d));
  r.shoot_count = shoot_offset(spec, d, r.N, false).state.sign_changes;
  r.agree = std::llabs(r.sturm_count - r.shoot_count) <= 1;
  return r;
}

DecayFit decay_fit(const std::vector<EigenvalueRecord>& records) {
  std::vector<double> lk, llog, negk2, logd;
  for (const auto& r : records) {
    if (r.k < 1 || !r.converged || !(r.d > 0.0) || !(r.d < 1.0)) continue;
    const double ld = std::log(r.d);
    lk.push_back(std::log(static_cast<double>(r.k)));
    llog.push_back(std::log(-ld));
    negk2.push_back(-static_cast<double>(r.k) * r.k);
    logd.push_back(ld);
  }
  if (lk.size() < 3) {
    throw Error(ErrorCode::TooFewPoints, "decay fit needs 3 converged records with k >= 1 and d < 1, got " +
                                             std::to_string(lk.size()));
  }
  const LinearFit p = fit_line(lk, llog);
  const LinearFit c = fit_line(negk2, logd);
  DecayFit f;
  f.slope_p = p.slope;
  f.r2 = p.r2;
  f.c_est = c.slope;
  f.K = lk.size();
  return f;
}

bool log_distance_concave(const std::vector<EigenvalueRecord>& records) {
  std::vector<const EigenvalueRecord*> conv;
  for (const auto& r : records)
    if (r.converged && r.d > 0.0) conv.push_back(&r);
  if (conv.size() < 3) return false;
  for (std::size_t i = 2; i < conv.size(); ++i) {
    if (conv[i]->k != conv[i - 1]->k + 1 || conv[i - 1]->k != conv[i - 2]->k + 1) return false;
    const double d2 = std::log(conv[i]->d) - 2.0 * std::log(conv[i - 1]->d) + std::log(conv[i - 2]->d);
    if (!(d2 < 0.0)) return false;
  }
  return true;
}

std::vector<double> truncation_spectrum(const TruncatedOperator& op, int threads) {
  const std::int64_t N = op.N();
  std::vector<double> out(static_cast<std::size_t>(N));
  const double bound = op.sup_norm() + 2.0;
  auto solve = [&](std::int64_t first, std::int64_t step) {
    for (std::int64_t i = first; i < N; i += step) {
      // Smallest E with count_below(E) >= i + 1.
      double lo = -bound - 1.0, hi = bound + 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count_below(op, mid) >= i + 1) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      out[static_cast<std::size_t>(i)] = 0.5 * (lo + hi);
    }
  };
  threads = std::max(1, threads);
  if (threads == 1) {
    solve(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(solve, t, threads);
    for (auto& th : pool) th.join();
  }
  return out;
}

void write_eigenvalue_csv(std::ostream& out, const std::vector<EigenvalueRecord>& records) {
  out << "k,side,E_offset,d,N_used,converged\n";
  for (const auto& r : records) {
    out << r.k << ',' << to_string(r.side) << ',' << to_string(r.E_offset, 32) << ',' << fmt_double(r.d) << ','
        << r.N_used << ',' << (r.converged ? "true" : "false") << '\n';
  }
}

std::string decay_fit_json(const DecayFit& fit) {
  nlohmann::ordered_json j;
  j["c_est"] = fit.c_est;
  j["slope_p"] = fit.slope_p;
  j["r2"] = fit.r2;
  j["K"] = fit.K;
  return j.dump();
}

std::vector<EigenvalueRecord> read_eigenvalue_csv(std::istream& in) {
  std::vector<EigenvalueRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("k,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 6) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 6 columns");
    }
    try {
      EigenvalueRecord r;
      r.k = std::stoi(f[0]);
      r.side = parse_side(f[1]);
      r.E_offset = parse_dd(f[2]);
      r.d = std::stod(f[3]);
      r.N_used = std::stoll(f[4]);
      if (f[5] != "true" && f[5] != "false") throw std::invalid_argument("converged flag");
      r.converged = f[5] == "true";
      out.push_back(r);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace vnwlab
