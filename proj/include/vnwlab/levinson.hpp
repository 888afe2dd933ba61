#pragma once

// The square-summable solution at E = 0 by asymptotic integration.
//
// With V(n) = (-1)^n 2 v_n, v_n = (1 + c / ln n) / (2n), the vector
// Y_n = (y_{n-1}, y_n) obeys Y_{n+1} = B_n Y_n, B_n = [[0, 1], [-1, (-1)^{n+1} 2 v_n]].
// The chain of substitutions
//
//   Y_n = T_n Z_n,  Z_n = H W_n,  W_n = (I + v_n A_n) U_n
//
// with the rotation frame T_n, H = [[1, 1], [1, -1]] and the oscillation
// remover A_n = ((-1)^n / 2) J, J = [[0, 1], [-1, 0]], turns the equation into
//
//   U_{n+1} = (Lambda_n + R_n) U_n,  Lambda_n = diag(1 - v_n, 1 + v_n),
//
// with R_n = O(n^-2). The decaying solution is U_n = p_n C_n, where
// p_n = prod_{j0 <= j < n} (1 - v_j) and C solves the fixed-point equation
//
//   C_n = e1 - sum_{j >= n} (1 / (1 - v_j)) diag(1, prod_{k=n}^{j} q_k) R_j C_j,
//   q_k = (1 - v_k) / (1 + v_k).
//
// Naming: A_n here is the oscillation remover (A_osc), unrelated to the
// one-step perturbation of the variation-of-constants analysis, and C_n is
// the correction, unrelated to the basis coefficient there.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vnwlab/linalg2.hpp"
#include "vnwlab/stats.hpp"

namespace vnwlab {

/// v_n = (1 + c_log / ln n) / (2n); n >= 3.
double v_seq(std::int64_t n, double c_log = 2.0);

struct LevinsonFrame {
  std::int64_t n = 0;
  Mat2<double> T;      // rows (cos, sin) at pi (n - 1) / 2 and pi n / 2
  Mat2<double> H;      // [[1, 1], [1, -1]]
  Mat2<double> A_osc;  // ((-1)^n / 2) [[0, 1], [-1, 0]]
  double v = 0.0;
};
LevinsonFrame levinson_frame(std::int64_t n, double c_log = 2.0);

/// B_n, the one-step matrix of Y.
Mat2<double> y_step(std::int64_t n, double c_log = 2.0);
/// I + v_n [[-1, (-1)^{n+1}], [(-1)^n, 1]], the one-step matrix of W in closed form.
Mat2<double> w_step(std::int64_t n, double c_log = 2.0);
/// (T_{n+1} H)^{-1} B_n T_n H evaluated directly; equal to w_step(n) up to rounding.
Mat2<double> w_step_direct(std::int64_t n, double c_log = 2.0);
/// T_n H (I + v_n A_n): maps U_n to Y_n.
Mat2<double> u_to_y(std::int64_t n, double c_log = 2.0);

struct ModelStep {
  std::int64_t n = 0;
  Mat2<double> Lambda;
  Mat2<double> G;  // U_{n+1} = G U_n
  Mat2<double> R;  // G - Lambda
};
/// G_n = (I + v_{n+1} A_{n+1})^{-1} w_step(n) (I + v_n A_n). Needs n >= 3.
ModelStep one_step_model(std::int64_t n, double c_log = 2.0);

/// Max relative deviation between u_to_y(n+1) G_n U and B_n u_to_y(n) U over
/// `trials` random U at each n.
double chain_consistency(const std::vector<std::int64_t>& indices, int trials = 16, std::uint64_t seed = 0x5eed,
                         double c_log = 2.0);

struct ContractionProfile {
  std::int64_t n_max = 0;
  double K = 0.0;          // envelope ||R_n|| <= K / n^2 fitted on [n_max / 2, n_max]
  double tail_bound = 0.0; // K / n_max, bound on sum_{j > n_max} ||R_j||
  double sup_n2_R = 0.0;   // sup n^2 ||R_n|| over [10, n_max]
  std::int64_t argsup = 0;
};
ContractionProfile contraction_profile(std::int64_t n_max, double c_log = 2.0);

/// (1 / (1 - v_{j0})) (sum_{j0 <= j <= n_max} ||R_j|| + tail_bound).
double contraction_at(std::int64_t j0, std::int64_t n_max, double c_log = 2.0);

/// Smallest j0 >= 10 whose contraction (tail included) is <= bound.
/// Throws Error{CannotSatisfy} if none up to n_max qualifies or the envelope is unusable.
std::int64_t choose_j0(double bound = 0.5, std::int64_t n_max = 1'000'000, double c_log = 2.0);

struct CorrectionSolution {
  std::int64_t j0 = 0;
  std::int64_t n_max = 0;
  std::vector<Vec2<double>> C;  // C[n - j0], n in [j0, n_max]
  int iterations = 0;
  double contraction = 0.0;      // (1 / (1 - v_{j0})) sum_{j0}^{n_max} ||R_j||
  std::vector<double> diffs;     // sup ||C^(m+1) - C^(m)|| per sweep
  double max_ratio = 0.0;        // max diffs[m+1] / diffs[m] over sweeps with diffs[m] > 1e-13

  const Vec2<double>& at(std::int64_t n) const { return C[static_cast<std::size_t>(n - j0)]; }
};

/// Picard iteration on [j0, n_max] for the model of the given c_log. Throws
/// Error{NotContracting} if the measured contraction is >= 1 and
/// Error{NoConvergence} if `tol` is not reached in 500 sweeps.
CorrectionSolution solve_correction(std::int64_t j0, std::int64_t n_max, double tol = 1e-15, double c_log = 2.0);

/// Same iteration for given R_j and v_j, j = j0 .. j0 + R.size() - 1.
CorrectionSolution solve_correction(std::int64_t j0, std::span<const Mat2<double>> R, std::span<const double> v,
                                    double tol = 1e-15);

struct EmbeddedSolution {
  std::int64_t j0 = 0;
  std::int64_t n_max = 0;
  double c_log = 2.0;
  std::vector<double> y;         // y[n - j0], normalized so y_{j0} = 1
  std::vector<double> log_p;     // ln p_n
  std::vector<double> residual;  // relative residual at n, 0 at the two ends
  double max_residual = 0.0;
  double overlap_dev = 0.0;      // y_{n-1} from Y_n against y_{n-1} from Y_{n-1}, relative

  double y_at(std::int64_t n) const { return y[static_cast<std::size_t>(n - j0)]; }
};

EmbeddedSolution build_embedded(const CorrectionSolution& correction, double c_log = 2.0);

struct EmbeddedDiagnostics {
  BoundednessReport decay;       // n ln^2 n y_n^2
  BoundednessReport log_product; // |ln p_n + ln n / 2 + ln ln n|
  double sup_decay = 0.0;
  std::int64_t sup_decay_n = 0;
  bool sup_inside = false;       // sup not attained in the last quarter-decade (informational)
  /// sum_{m < n <= n_max} y_n^2 divided by 1/ln m - 1/ln n_max, the same sum
  /// for 1/(n ln^2 n); roughly constant when y_n^2 ~ 1/(n ln^2 n).
  std::vector<NormalizedSample> l2_tail;
};
/// Sampled on the quarter-decade grid of [lo, n_max]; reference window is the mid-range decade.
EmbeddedDiagnostics embedded_diagnostics(const EmbeddedSolution& sol, std::int64_t lo = 1000);

struct OracleComparison {
  std::int64_t lo = 0, hi = 0, norm_site = 0;
  std::int64_t n_start = 0;
  double oracle_disagreement = 0.0;
  double max_rel_dev = 0.0;
};
/// Normalizes both sequences at norm_site (default lo) and returns the sup of
/// |y - y_oracle| / |y_oracle| over [lo, hi]. The oracle is the backward
/// recursion at E = 0 from n_start and 2 n_start.
OracleComparison compare_backward_oracle(const EmbeddedSolution& sol, std::int64_t lo = 1000,
                                         std::int64_t hi = 10'000, std::int64_t norm_site = 0,
                                         std::int64_t n_start = std::int64_t{1} << 31, double oracle_tol = 1e-6);

/// Columns n,y_n,ln_p_n,residual_n; every `stride`-th site plus the last.
void write_embedded_csv(std::ostream& out, const EmbeddedSolution& sol, std::int64_t stride = 1);
/// {"j0","n_max","contraction","max_residual","sup_n_ln2n_y2"}
std::string embedded_summary_json(const CorrectionSolution& correction, const EmbeddedSolution& sol,
                                  const EmbeddedDiagnostics& diag);

}  // namespace vnwlab
