#pragma once

// Shooting for the half-line equation
//
//   u(n+1) + u(n-1) + V(n) u(n) = E u(n),   n >= 1.
//
// The recursion is run in difference form,
//
//   s(n)   = s(n-1) + (e - V(n)) u(n),   s(n) = u(n+1) - u(n),
//   u(n+1) = u(n) + s(n),
//
// with e = E - 2 supplied directly. Near the band edge E = 2 this keeps the
// small quantity e - V(n) free of the cancellation that E - V(n) suffers,
// which matters once V(n) ~ 1/n is below machine epsilon relative to 2.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vnwlab/potentials.hpp"

namespace vnwlab {

/// Scaled solution pair. The true value at site n is u_curr * exp(log_scale).
/// Rescaling uses powers of two only, so signs and counts are bit-identical to
/// an unscaled run.
struct ShootingState {
  std::int64_t n = 1;
  double u_prev = 0.0;  // u(n-1)
  double u_curr = 1.0;  // u(n)
  double slope = 1.0;   // u(n) - u(n-1)
  double log_scale = 0.0;
  std::int64_t sign_changes = 0;
  int last_sign = 1;

  /// State at n = 1 from (u(0), u(1)). Throws Error{TrivialSolution} if both vanish.
  static ShootingState initial(double u0, double u1);

  double log_abs_value() const;
};

struct ZeroRecord {
  std::vector<std::int64_t> positions;
  double energy = 0.0;
  std::int64_t horizon = 0;
};

struct ShootResult {
  ShootingState state;
  std::optional<ZeroRecord> zeros;
};

/// Sign-change convention: a change is recorded at the first site carrying the
/// new sign; an exact zero at site n counts once, at n, and its neighbours are
/// then necessarily of opposite sign.
ShootingState step(const ShootingState& state, double E, const PotentialSpec& spec);
ShootingState step_offset(const ShootingState& state, double e_offset, const PotentialSpec& spec);

/// Advances in place up to site n_target, appending new sign-change sites to
/// `zeros` when non-null. Potential values are produced blockwise.
void advance(ShootingState& state, const PotentialSpec& spec, double e_offset, std::int64_t n_target,
             std::vector<std::int64_t>* zeros = nullptr);

/// Canonical data u(0) = 0, u(1) = 1, run to site N >= 2. Sign changes are
/// counted over sites 1..N.
ShootResult shoot(const PotentialSpec& spec, double E, std::int64_t N, bool record_zeros);
ShootResult shoot_offset(const PotentialSpec& spec, double e_offset, std::int64_t N, bool record_zeros);
ShootResult shoot_from(const PotentialSpec& spec, double e_offset, double u0, double u1, std::int64_t N,
                       bool record_zeros);

std::int64_t count_sign_changes(const PotentialSpec& spec, double E, std::int64_t N);

/// Backward run from generic data u(n_start) = 1, u(n_start + 1) = 0. A second
/// lane started at 2 n_start shares the potential evaluations; the returned
/// samples come from the longer lane.
struct BackwardSolution {
  std::int64_t first_n = 0;
  std::vector<double> values;  // sites first_n .. first_n + window, values[0] == 1
  std::int64_t n_start = 0;
  double disagreement = 0.0;   // relative sup-difference between the two lanes
};

/// Throws Error{NoConvergence} when the lanes disagree by more than tol.
BackwardSolution subordinate_backward(const PotentialSpec& spec, double E, std::int64_t n_start,
                                      std::int64_t n_stop, std::int64_t window, double tol = 1e-8);

struct ShootSummary {
  double energy = 0.0;
  std::int64_t N = 0;
  std::int64_t sign_changes = 0;
  double log_scale = 0.0;
};

/// Columns k,z_k,energy.
void write_zero_csv(std::ostream& out, const ZeroRecord& zeros);
/// Columns E,N,sign_changes,log_scale.
void write_shoot_summary_csv(std::ostream& out, const std::vector<ShootSummary>& rows);

}  // namespace vnwlab
