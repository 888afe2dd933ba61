#pragma once

// Batch experiments behind the CLI subcommands. Each runner validates its
// options, does the work, writes its CSV artifact (if a stream is given) and
// returns an envelope whose checks decide the exit status. The CLI only parses
// options and routes output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vnwlab/report.hpp"

namespace vnwlab {

struct EigOptions {
  std::string potential = "logvnw:2";
  std::string side = "above";
  int k_max = 6;
  double tol = 1e-20;
  std::int64_t N_min = 64;
  std::int64_t N_cap = std::int64_t{1} << 24;
};
/// Eigenvalue CSV to `csv`; decay fit (or the reason it is unavailable) in the result.
/// Check: at least one converged record whenever any record exists.
ReportEnvelope run_eig(const EigOptions& opt, std::ostream* csv);

struct ZerosOptions {
  std::string potential = "logvnw:2";
  double E = 2.0;
  std::int64_t N = 1'000'000;
  int k0 = 3;
};
/// Zero CSV to `csv`. Check: the gap fit has enough zeros.
ReportEnvelope run_zeros(const ZerosOptions& opt, std::ostream* csv);

struct MnCheckOptions {
  std::vector<std::int64_t> n;  // empty: quarter-decade grid of [10, 1e6]
  double c_log = 2.0;
  bool asymptotics = false;     // also the basis asymptotics and asymptotic-form bundle
};
/// Asymptotic CSV to `csv` when the bundle is requested.
ReportEnvelope run_mn_check(const MnCheckOptions& opt, std::ostream* csv);

struct PruferOptions {
  std::int64_t n_max = 1'000'000;
  double c_log = 2.0;
  int random_t = 32;
  int angles = 1000;
  std::int64_t n_start = 100;
  std::int64_t steps = 10'000;
  std::uint64_t seed = 0x5eed;
};
ReportEnvelope run_prufer(const PruferOptions& opt, std::ostream* csv);

struct EmbeddedOptions {
  std::int64_t n_max = 1'000'000;
  double c_log = 2.0;
  double bound = 0.5;
  double tol = 1e-15;
  bool oracle = true;
  std::int64_t oracle_lo = 1000;
  std::int64_t oracle_hi = 10'000;
  std::int64_t stride = 1;
};
/// Embedded-solution CSV to `csv`.
ReportEnvelope run_embedded(const EmbeddedOptions& opt, std::ostream* csv);

struct FitOptions {
  std::string input;  // eigenvalue CSV
};
ReportEnvelope run_fit(const FitOptions& opt, std::ostream* csv);

struct SelftestOptions {
  int threads = 1;
};
ReportEnvelope run_selftest(const SelftestOptions& opt, std::ostream* csv);

}  // namespace vnwlab
