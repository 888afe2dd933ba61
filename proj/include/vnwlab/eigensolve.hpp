#pragma once

// Discrete eigenvalues outside [-2, 2] of the N x N truncation
//
//   (H u)(1) = u(2) + V(1) u(1),  (H u)(n) = u(n+1) + u(n-1) + V(n) u(n),  u(N+1) = 0,
//
// by Sturm counts and bisection on the offset from the band edge.
//
// The bisection variable is the offset e = E - 2 (above) carried in
// double-double. Counts above 2 + e come from the sign changes of the leading
// minors u(1..N+1), run in difference form
//   slope_n = slope_{n-1} + (e - V(n)) u_n,  u_{n+1} = u_n + slope_n,
// which keeps e - V(n) at full relative precision and needs no division.
// The side below the band is handled through V -> -V.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vnwlab/ddreal.hpp"
#include "vnwlab/potentials.hpp"

namespace vnwlab {

enum class Side { Above, Below };
const char* to_string(Side side) noexcept;
/// "above" or "below"; throws Error{InvalidParameter} otherwise.
Side parse_side(std::string_view text);

class TruncatedOperator {
 public:
  TruncatedOperator(PotentialSpec spec, std::int64_t N);

  std::int64_t N() const noexcept { return N_; }
  const PotentialSpec& spec() const noexcept { return spec_; }
  std::span<const double> diagonal() const noexcept { return diag_; }
  double sup_norm() const noexcept { return sup_; }

 private:
  PotentialSpec spec_;
  std::int64_t N_;
  std::vector<double> diag_;
  double sup_ = 0.0;
};

/// Number of eigenvalues strictly below E. A zero pivot is replaced by
/// +2^-100: in the interior either sign gives the same total, and at the last
/// site the positive choice leaves an eigenvalue sitting exactly at E
/// uncounted. Double-double pivots.
std::int64_t sturm_count_below(const TruncatedOperator& op, DD E);
/// Same recurrence in plain binary64.
std::int64_t sturm_count_below(const TruncatedOperator& op, double E);
/// Number of eigenvalues strictly above 2 + e, offset form.
std::int64_t count_above_offset(const TruncatedOperator& op, DD e);

struct EigenvalueRecord {
  int k = 0;
  Side side = Side::Above;
  DD E_offset;  // E - 2 above the band, E + 2 below
  double d = 0.0;
  std::int64_t N_used = 0;
  bool converged = false;
  bool localization_warning = false;  // 1/sqrt(d) > N/4
};

/// Bisection on the offset in (0, ||V||_inf + 2]: an exponent search first,
/// then plain halving until the bracket is <= tol. Throws
/// Error{NoSuchEigenvalue} if fewer than k + 1 eigenvalues lie beyond the band.
EigenvalueRecord eigenvalue_k(const TruncatedOperator& op, Side side, int k, DD tol);

struct ConvergenceOptions {
  std::int64_t N_min = 64;
  std::int64_t N_cap = std::int64_t{1} << 24;
};

/// Doubles N until two successive offsets differ by < tol. If the cap is hit
/// the last record is returned with converged = false. Throws
/// Error{NoSuchEigenvalue} if no truncation up to the cap has k + 1
/// eigenvalues beyond the band.
EigenvalueRecord converge_in_N(const PotentialSpec& spec, Side side, int k, DD tol,
                               const ConvergenceOptions& opt = {});

/// k = 0..k_max, stopping after the first missing or unconverged eigenvalue
/// (an unconverged one is included, flagged).
std::vector<EigenvalueRecord> scan_outside(const PotentialSpec& spec, Side side, int k_max, DD tol,
                                           const ConvergenceOptions& opt = {});

struct OscillationCheck {
  double d = 0.0;
  std::int64_t N = 0;
  std::int64_t sturm_count = 0;
  std::int64_t shoot_count = 0;
  bool agree = false;  // |difference| <= 1
};
/// Truncation and shooting horizon N = ceil(10 / d); requires 0 < d < 1/2.
OscillationCheck oscillation_crosscheck(const PotentialSpec& spec, double d);

struct DecayFit {
  double c_est = 0.0;    // slope of ln d_k against -k^2
  double slope_p = 0.0;  // slope of ln(-ln d_k) against ln k
  double r2 = 0.0;       // of the slope_p fit
  std::size_t K = 0;
};
/// Uses converged records with k >= 1 only; needs three (Error{TooFewPoints}).
DecayFit decay_fit(const std::vector<EigenvalueRecord>& records);

/// ln d_k strictly concave over consecutive converged records (needs >= 3).
bool log_distance_concave(const std::vector<EigenvalueRecord>& records);

/// All N eigenvalues in ascending order, each by bisection on plain-double
/// Sturm counts to within a few ulps. Eigenvalue indices are split across
/// `threads` workers; the result does not depend on the split.
std::vector<double> truncation_spectrum(const TruncatedOperator& op, int threads = 1);

/// Columns k,side,E_offset,d,N_used,converged (offset with 32 digits).
void write_eigenvalue_csv(std::ostream& out, const std::vector<EigenvalueRecord>& records);
/// {"c_est":..,"slope_p":..,"r2":..,"K":..}
std::string decay_fit_json(const DecayFit& fit);
/// Reads the columns written by write_eigenvalue_csv.
std::vector<EigenvalueRecord> read_eigenvalue_csv(std::istream& in);

}  // namespace vnwlab
