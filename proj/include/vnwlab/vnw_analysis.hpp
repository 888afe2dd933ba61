#pragma once

// Variation-of-constants analysis of the log-corrected potential at E = 2.
//
// Unperturbed basis: V0(n) = (-1)^n / n, E = 2 is solved by
//
//   phi_{2m} = phi_{2m+1} = prod_{j=1}^m 2j / (2j - 1),
//
// and psi_n = C_n phi_n with C_{n+1} - C_n = 1 / (phi_n phi_{n+1}). The
// asymptotic forms phi_{2m} ~ sqrt(2m), C_n ~ ln n hold for the rescaled
// pair phi / kappa, kappa^2 C with kappa = sqrt(pi / 2); everything below the
// basis (A_n, M_n, eigendata, the tangent recursion) uses that rescaled pair.
// Products phi^2 C are scale invariant, but C itself, a_n and t_n are not.
//
// Index conventions: A_n and the basis are indexed by site; the two-step
// matrix M_n = (1 + A_{2n+1})(1 + A_{2n}) and everything derived from it by
// the two-step index n, which maps D_{2n-1} to D_{2n+1}.
//
// The core is carried in double-double: M_n - I is O(ln n / n) while the
// factors have entries O(ln n), so the product loses ~log10(n) digits.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vnwlab/ddreal.hpp"
#include "vnwlab/linalg2.hpp"
#include "vnwlab/recursion.hpp"
#include "vnwlab/stats.hpp"

namespace vnwlab {

/// sqrt(pi / 2), the limit of phi_{2m} / sqrt(2m) (Wallis).
DD wallis_kappa();

/// Constant added to the raw sum (raw C_0 = 0) so that C_{n_ref} = ln n_ref.
/// Streams the product and sum; O(n_ref) work, no storage.
DD anchor_shift_at(std::int64_t n_ref);

struct UnperturbedBasis {
  std::int64_t n = 0;
  double log_phi = 0.0;  // ln of the unscaled product
  double C = 0.0;        // anchored, rescaled C_n
};

/// Read-only table of phi (unscaled product), the rescaled phi and the
/// anchored C on sites 0..max_n. The additive constant in C is fixed by
/// C_{n_ref} = ln n_ref; n_ref may exceed max_n (the sum is then streamed).
class BasisTable {
 public:
  explicit BasisTable(std::int64_t max_n, std::int64_t n_ref = 1'000'000);

  std::int64_t max_n() const noexcept { return max_n_; }
  std::int64_t n_ref() const noexcept { return n_ref_; }
  DD kappa() const noexcept { return kappa_; }

  DD phi_raw(std::int64_t n) const;  // product form, phi_raw(2) == 2
  DD phi(std::int64_t n) const;      // phi_raw / kappa
  DD C(std::int64_t n) const;
  /// ln phi_raw from a compensated sum of log1p(1 / (2j - 1)); an independent
  /// route to the product.
  double log_phi_raw(std::int64_t n) const;
  /// Additive constant that was added to the raw sum (raw C_0 = 0).
  DD anchor_shift() const noexcept { return shift_; }

  UnperturbedBasis at(std::int64_t n) const;

 private:
  void check(std::int64_t n) const;

  std::int64_t max_n_;
  std::int64_t n_ref_;
  DD kappa_;
  DD shift_;
  std::vector<DD> phi_raw_;
  std::vector<DD> c_;
  std::vector<double> log_phi_;
};

/// Two-step matrix with the scalar ingredients of its closed form.
struct TwoStepMatrix {
  std::int64_t n = 0;
  Mat2<DD> entries;
  DD eps, w, c, rho, rho_prime;
};

struct EigenData {
  std::int64_t n = 0;
  DD radicand;  // the expression under the square root
  DD lambda_plus, lambda_minus;
  DD a;  // v+ = (1, -a)
  DD b;  // v- = (1, -b)
};

/// Coefficients of the tangent recursion
///   t' = (s t + lambda_+ (a' - a)) / (s~ t + lambda_+ (1 + a a')).
struct PruferCoefficients {
  std::int64_t n = 0;
  DD s, s_tilde, lambda_plus, a, a_next;
};

class VnwAnalysis {
 public:
  /// Supports two-step indices up to max_index (sites up to 2 max_index + 3).
  explicit VnwAnalysis(std::int64_t max_index, double c_log = 2.0, std::int64_t n_ref = 1'000'000);

  const BasisTable& basis() const noexcept { return basis_; }
  double c_log() const noexcept { return c_log_; }
  std::int64_t max_index() const noexcept { return max_index_; }

  /// Envelope W_n = c_log / (n ln n) at site n, rounded once to double and
  /// then used as exact input by every route.
  DD envelope(std::int64_t site) const;

  Mat2<DD> a_matrix(std::int64_t site) const;
  TwoStepMatrix m_product(std::int64_t n) const;
  TwoStepMatrix m_closed(std::int64_t n) const;
  /// Throws Error{DegenerateEigenvalues} if the radicand is not positive.
  EigenData m_eigendata(std::int64_t n) const;
  PruferCoefficients prufer_coefficients(std::int64_t n) const;

  /// Throws Error{DenominatorVanishes} if the denominator is not positive.
  DD prufer_step(DD t, std::int64_t n) const;
  double prufer_step(double t, std::int64_t n) const;

  /// D_{2n-1} = cos(theta) v+ + sin(theta) (a_n, 1) mapped through T0(2n-1).
  Vec2<DD> solution_from_angle(double theta, std::int64_t n) const;

 private:
  void check_index(std::int64_t n) const;

  std::int64_t max_index_;
  double c_log_;
  BasisTable basis_;
};

/// Signs of (y_{2n-1}, y_{2n}) for the angle theta relative to v+.
struct PositivitySigns {
  int y_odd = 0;
  int y_even = 0;
};
PositivitySigns positivity_from_angle(const VnwAnalysis& an, double theta, std::int64_t n);

/// Validity threshold: max(floor, 1 + last failing n) on [2, scan_hi], where a
/// failure is a non-positive radicand, b <= a or a <= 0, a non-positive
/// tangent-recursion denominator at t = 1/ln n, or a non-increasing step map
/// on [0, 1/ln n].
std::int64_t determine_n0(const VnwAnalysis& an, std::int64_t scan_hi = 10'000, std::int64_t floor = 50);

struct Lemma21Report {
  DD kappa;
  BoundednessReport phi_error;  // |phi_{2n} - kappa sqrt(2n)| sqrt(n)
  BoundednessReport c_error;    // |C_n - ln n| n
  std::vector<NormalizedSample> ratio_deviation;  // |phi_{2n} / sqrt(2n) - kappa|
  double anchor_stability = 0.0;  // change of the additive constant when anchoring at 10 n_ref instead
  bool ok() const { return phi_error.bounded && c_error.bounded; }
};

/// Samples on the quarter-decade grid of [lo, hi], reference median over [ref_lo, ref_hi].
/// With strict set, throws Error{AsymptoticViolation} on failure.
Lemma21Report lemma21_check(const BasisTable& basis, std::int64_t lo, std::int64_t hi, std::int64_t ref_lo = 1000,
                            std::int64_t ref_hi = 10'000, bool strict = false);

/// Normalized errors of the asymptotic forms of eps, rho, rho', lambda+-,
/// a_n, s_n, s~_n (in that order), plus n ||M_n - I|| / ln n, ||A_n|| / ln n and
/// (b_n - a_n) ln^2 n. The reference forms are those of c_log = 2.
std::vector<BoundednessReport> asymptotics_report(const VnwAnalysis& an, std::int64_t lo, std::int64_t hi,
                                                  std::int64_t ref_lo = 1000, std::int64_t ref_hi = 10'000);

struct MIdentityReport {
  struct Row {
    std::int64_t n = 0;
    double max_rel_dev = 0.0;  // closed vs product, entrywise relative
    double det_dev = 0.0;      // |det M - 1|, product form
    double eig_product_dev = 0.0;  // |lambda+ lambda- - 1|, where eigendata exist
  };
  std::vector<Row> rows;
  double max_rel_dev = 0.0;
  double max_det_dev = 0.0;
};
MIdentityReport m_identity_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices);

struct Lemma33Report {
  enum class Kind { Boundary, Zero, Random };
  struct Row {
    std::int64_t n = 0;
    Kind kind = Kind::Random;
    double t = 0.0;
    double t_next = 0.0;
    double bound = 0.0;  // 1 / ln(n + 1)
  };
  std::vector<Row> rows;
  std::size_t upper_violations = 0;  // t_next > bound, any row
  std::size_t lower_violations = 0;  // t_next < 0 for a random draw
  double t_next_at_zero_min = 0.0;   // t = 0 maps below zero because a_n decreases
  bool ok() const { return upper_violations == 0 && lower_violations == 0; }
};
/// For each sampled n: t = 1/ln n, t = 0 and `random_t` uniform draws from [0, 1/ln n].
Lemma33Report lemma33_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int random_t = 32,
                            std::uint64_t seed = 0x5eed);

struct PositivityReport {
  std::size_t trials = 0;
  std::size_t violations = 0;
  std::int64_t first_bad_n = 0;
  double first_bad_theta = 0.0;
};
PositivityReport positivity_check(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int angles = 1000,
                            std::uint64_t seed = 0x5eed);

struct PruferConsistency {
  std::int64_t n_start = 0;
  std::int64_t steps = 0;
  double max_rel_dev = 0.0;
  double t_final = 0.0;
};
/// Composes the tangent recursion and the direct action D -> M_n D from t0.
PruferConsistency prufer_consistency(const VnwAnalysis& an, std::int64_t n_start, std::int64_t steps, double t0);

struct RIncrementReport {
  double C_measured = 0.0;  // max (r_{n+1} - r_n) n / ln n over the regime
  std::int64_t argmax_n = 0;
  std::size_t samples = 0;
};
/// Regime ln^{-3/2} n <= t <= ln^{-1} n, t sampled at `per_n` points.
RIncrementReport r_increment(const VnwAnalysis& an, const std::vector<std::int64_t>& indices, int per_n = 9);

struct WindowInequalityReport {
  std::size_t cases = 0;
  std::size_t violations = 0;
};
/// For each (C, A) with 3AC < 1 and ln N1 with ln^{1/2} N1 >= max(A, 1/(1 - 3AC)):
/// every ln N2 <= ln N1 + A ln^{1/2} N1 satisfies
///   ln N1 + C (ln^2 N2 - ln^2 N1) <= ln^{3/2} N2.
WindowInequalityReport window_inequality_check(const std::vector<double>& C_values,
                                               const std::vector<double>& A_values,
                                               const std::vector<double>& log_N1_values);

struct ZeroGap {
  std::size_t k = 0;  // 1-based zero index
  std::int64_t z = 0;
  double gap = 0.0;   // (ln z_{k+1} - ln z_k) / sqrt(ln z_k)
};

struct WindowReport {
  std::int64_t N1 = 0;  // zero pair attaining the minimum gap
  std::int64_t N2 = 0;
  double A_est = 0.0;
  std::vector<ZeroGap> zero_gaps;
  double trend_slope = 0.0;  // slope of ln g_k against ln k over k >= k0
  bool decaying = false;     // trend_slope < -1/4: gaps shrink to zero
};

/// Needs at least five zeros (Error{TooFewZeros}); A_est is the minimum over k >= k0.
WindowReport zero_gap_fit(const ZeroRecord& zeros, std::size_t k0 = 3);

/// Columns n,quantity_name,normalized_error.
void write_asymptotic_csv(std::ostream& out, const std::vector<BoundednessReport>& reports);
/// Columns k,z_k,gap_statistic.
void write_window_csv(std::ostream& out, const WindowReport& report);

}  // namespace vnwlab
