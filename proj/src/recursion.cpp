#include "vnwlab/recursion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "vnwlab/errors.hpp"
#include "vnwlab/format.hpp"

namespace vnwlab {

namespace {

constexpr int kBandExp = 512;
const double kBandHi = std::ldexp(1.0, kBandExp);
const double kBandLo = std::ldexp(1.0, -kBandExp);
constexpr std::int64_t kBlock = 4096;
const double kLn2 = std::log(2.0);

inline int sign_of(double x) noexcept { return x > 0.0 ? 1 : -1; }

/// Brings max(|a|, |b|) back into the band; c rides along.
inline void rescale(double& a, double& b, double& c, double& log_scale) {
  const double m = std::max(std::fabs(a), std::fabs(b));
  if (m <= kBandHi && m >= kBandLo) return;
  int e = 0;
  std::frexp(m, &e);
  a = std::ldexp(a, -e);
  b = std::ldexp(b, -e);
  c = std::ldexp(c, -e);
  log_scale += e * kLn2;
}

inline void tally(ShootingState& s, std::vector<std::int64_t>* zeros) {
  const double x = s.u_curr;
  if (x == 0.0) {
    ++s.sign_changes;
    s.last_sign = -s.last_sign;
    if (zeros) zeros->push_back(s.n);
  } else if (sign_of(x) != s.last_sign) {
    ++s.sign_changes;
    s.last_sign = -s.last_sign;
    if (zeros) zeros->push_back(s.n);
  }
}

inline void check_state(const ShootingState& s) {
  if (s.u_prev == 0.0 && s.u_curr == 0.0) throw Error(ErrorCode::TrivialSolution, "solution vanishes identically");
}

ZeroRecord make_record(std::vector<std::int64_t> zeros, double e_offset, std::int64_t N) {
  ZeroRecord r;
  r.positions = std::move(zeros);
  r.energy = 2.0 + e_offset;
  r.horizon = N;
  return r;
}

}  // namespace

ShootingState ShootingState::initial(double u0, double u1) {
  ShootingState s;
  s.n = 1;
  s.u_prev = u0;
  s.u_curr = u1;
  s.slope = u1 - u0;
  check_state(s);
  rescale(s.u_prev, s.u_curr, s.slope, s.log_scale);
  // Site 1 is the first counted site; a zero there counts like any other.
  if (s.u_curr == 0.0) {
    s.last_sign = sign_of(s.u_prev);
    tally(s, nullptr);
  } else {
    s.last_sign = sign_of(s.u_curr);
  }
  return s;
}

double ShootingState::log_abs_value() const { return std::log(std::fabs(u_curr)) + log_scale; }

ShootingState step_offset(const ShootingState& state, double e_offset, const PotentialSpec& spec) {
  check_state(state);
  ShootingState s = state;
  const double v = eval_potential(spec, s.n);
  s.slope += (e_offset - v) * s.u_curr;
  s.u_prev = s.u_curr;
  s.u_curr += s.slope;
  ++s.n;
  tally(s, nullptr);
  rescale(s.u_prev, s.u_curr, s.slope, s.log_scale);
  check_state(s);
  return s;
}

ShootingState step(const ShootingState& state, double E, const PotentialSpec& spec) {
  return step_offset(state, E - 2.0, spec);
}

void advance(ShootingState& s, const PotentialSpec& spec, double e_offset, std::int64_t n_target,
             std::vector<std::int64_t>* zeros) {
  check_state(s);
  std::array<double, kBlock> buf;
  double u_prev = s.u_prev, u = s.u_curr, slope = s.slope;
  while (s.n < n_target) {
    const std::int64_t len = std::min(kBlock, n_target - s.n);
    fill_potential(spec, s.n, std::span<double>(buf.data(), static_cast<std::size_t>(len)));
    for (std::int64_t k = 0; k < len; ++k) {
      slope += (e_offset - buf[static_cast<std::size_t>(k)]) * u;
      u_prev = u;
      u += slope;
      const int sg = u > 0.0 ? 1 : (u < 0.0 ? -1 : 0);
      if (sg != s.last_sign) {
        ++s.sign_changes;
        s.last_sign = -s.last_sign;
        if (zeros) zeros->push_back(s.n + k + 1);
      }
      const double m = std::max(std::fabs(u), std::fabs(u_prev));
      if (!(m <= kBandHi && m >= kBandLo)) {
        if (m == 0.0) {
          s.n += k + 1;
          throw Error(ErrorCode::TrivialSolution, "solution vanished at site " + std::to_string(s.n));
        }
        rescale(u_prev, u, slope, s.log_scale);
      }
    }
    s.n += len;
  }
  s.u_prev = u_prev;
  s.u_curr = u;
  s.slope = slope;
}

ShootResult shoot_from(const PotentialSpec& spec, double e_offset, double u0, double u1, std::int64_t N,
                       bool record_zeros) {
  if (N < 2) throw Error(ErrorCode::InvalidParameter, "shooting horizon N must be >= 2");
  if (!std::isfinite(e_offset)) throw Error(ErrorCode::InvalidParameter, "energy must be finite");
  ShootResult r;
  r.state = ShootingState::initial(u0, u1);
  std::vector<std::int64_t> zeros;
  if (record_zeros && r.state.sign_changes > 0) zeros.push_back(1);
  advance(r.state, spec, e_offset, N, record_zeros ? &zeros : nullptr);
  if (record_zeros) r.zeros = make_record(std::move(zeros), e_offset, N);
  return r;
}

ShootResult shoot_offset(const PotentialSpec& spec, double e_offset, std::int64_t N, bool record_zeros) {
  return shoot_from(spec, e_offset, 0.0, 1.0, N, record_zeros);
}

ShootResult shoot(const PotentialSpec& spec, double E, std::int64_t N, bool record_zeros) {
  return shoot_offset(spec, E - 2.0, N, record_zeros);
}

std::int64_t count_sign_changes(const PotentialSpec& spec, double E, std::int64_t N) {
  return shoot(spec, E, N, false).state.sign_changes;
}

BackwardSolution subordinate_backward(const PotentialSpec& spec, double E, std::int64_t n_start,
                                      std::int64_t n_stop, std::int64_t window, double tol) {
  if (n_stop < 1 || window < 0 || n_start <= n_stop + window + 1) {
    throw Error(ErrorCode::InvalidParameter, "backward run needs n_start > n_stop + window + 1 >= 2");
  }
  if (!(tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tolerance must be positive");
  const double e = E - 2.0;

  // Lane state: u = u(n), b = u(n) - u(n+1), p = u(n+1); stepping down one
  // site mirrors the forward difference form.
  struct Lane {
    double u = 1.0, b = 1.0, p = 0.0, log_scale = 0.0;
    bool active = false;
    std::vector<double> scaled, logs;
  };
  Lane lanes[2];
  const std::int64_t starts[2] = {n_start, 2 * n_start};
  lanes[1].active = true;
  const std::size_t count = static_cast<std::size_t>(window + 1);
  for (auto& l : lanes) {
    l.scaled.assign(count, 0.0);
    l.logs.assign(count, 0.0);
  }

  std::array<double, kBlock> buf;
  // Site n uses V(n) to produce u(n-1). Sweep n = 2 n_start .. n_stop + 1.
  std::int64_t hi = starts[1];
  while (hi > n_stop) {
    const std::int64_t lo = std::max(n_stop + 1, hi - kBlock + 1);
    const std::int64_t len = hi - lo + 1;
    fill_potential(spec, lo, std::span<double>(buf.data(), static_cast<std::size_t>(len)));
    for (std::int64_t n = hi; n >= lo; --n) {
      if (n == starts[0]) lanes[0].active = true;
      const double v = buf[static_cast<std::size_t>(n - lo)];
      for (auto& l : lanes) {
        if (!l.active) continue;
        l.b += (e - v) * l.u;
        l.p = l.u;
        l.u += l.b;
        const double m = std::max(std::fabs(l.u), std::fabs(l.p));
        if (!(m <= kBandHi && m >= kBandLo)) {
          if (m == 0.0) throw Error(ErrorCode::TrivialSolution, "backward solution vanished");
          rescale(l.u, l.p, l.b, l.log_scale);
        }
        const std::int64_t site = n - 1;
        if (site <= n_stop + window) {
          l.scaled[static_cast<std::size_t>(site - n_stop)] = l.u;
          l.logs[static_cast<std::size_t>(site - n_stop)] = l.log_scale;
        }
      }
    }
    hi = lo - 1;
  }

  std::vector<double> norm[2];
  for (int i = 0; i < 2; ++i) {
    const Lane& l = lanes[i];
    if (l.scaled[0] == 0.0) throw Error(ErrorCode::NoConvergence, "backward solution vanishes at the window edge");
    norm[i].resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      norm[i][j] = l.scaled[j] / l.scaled[0] * std::exp(l.logs[j] - l.logs[0]);
    }
  }
  double diff = 0.0, scale = 0.0;
  for (std::size_t j = 0; j < count; ++j) {
    diff = std::max(diff, std::fabs(norm[0][j] - norm[1][j]));
    scale = std::max(scale, std::fabs(norm[1][j]));
  }
  BackwardSolution r;
  r.first_n = n_stop;
  r.values = std::move(norm[1]);
  r.n_start = starts[1];
  r.disagreement = diff / scale;
  if (!(r.disagreement <= tol)) {
    throw Error(ErrorCode::NoConvergence, "backward lanes from " + std::to_string(starts[0]) + " and " +
                                              std::to_string(starts[1]) + " disagree by " +
                                              fmt_double(r.disagreement));
  }
  return r;
}

void write_zero_csv(std::ostream& out, const ZeroRecord& zeros) {
  out << "k,z_k,energy\n";
  for (std::size_t k = 0; k < zeros.positions.size(); ++k) {
    out << (k + 1) << ',' << zeros.positions[k] << ',' << fmt_double(zeros.energy) << '\n';
  }
}

void write_shoot_summary_csv(std::ostream& out, const std::vector<ShootSummary>& rows) {
  out << "E,N,sign_changes,log_scale\n";
  for (const auto& r : rows) {
    out << fmt_double(r.energy) << ',' << r.N << ',' << r.sign_changes << ',' << fmt_double(r.log_scale) << '\n';
  }
}

}  // namespace vnwlab
