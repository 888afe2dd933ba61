// vnwlab: batch driver for the experiments in the library.
//
//   vnwlab <command> [options]
//
// Commands: eig, zeros, mn-check, prufer, embedded, fit, selftest.
// Options may also come from a file of key=value lines (--config); flags given
// on the command line win. Exit status: 0 success, 1 usage or configuration
// error, 2 failed check or non-convergence, 3 internal numeric failure.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vnwlab/commands.hpp"
#include "vnwlab/errors.hpp"
#include "vnwlab/report.hpp"

namespace {

using vnwlab::Error;
using vnwlab::ErrorCode;

const char* const kCommands[] = {"eig", "zeros", "mn-check", "prufer", "embedded", "fit", "selftest"};

bool is_command(const std::string& s) {
  for (const char* c : kCommands)
    if (s == c) return true;
  return false;
}

/// Integer option given as a double so that "1e9" is accepted.
std::int64_t as_count(double x, const char* name) {
  if (!std::isfinite(x) || x != std::floor(x) || std::fabs(x) > 9.0e18) {
    throw Error(ErrorCode::InvalidParameter, std::string(name) + " must be an integer, got " + std::to_string(x));
  }
  return static_cast<std::int64_t>(x);
}

/// key=value lines become --key=value tokens; '#' starts a comment line.
std::vector<std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidParameter, "cannot open config file " + path);
  std::vector<std::string> tokens;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    key.erase(key.find_last_not_of(" \t") + 1);
    value.erase(0, value.find_first_not_of(" \t"));
    if (key == "config") throw Error(ErrorCode::ParseError, path + ": config files cannot include others");
    tokens.push_back("--" + key + "=" + value);
  }
  return tokens;
}

/// Splices config-file tokens right after the command name so that later
/// command-line flags override them.
std::vector<std::string> expand_args(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config = args[i].substr(9);
    }
  }
  if (config.empty()) return args;
  std::size_t cmd = args.size();
  for (std::size_t i = 0; i < args.size(); ++i)
    if (is_command(args[i])) {
      cmd = i;
      break;
    }
  if (cmd == args.size()) return args;
  const auto extra = read_config(config);
  args.insert(args.begin() + static_cast<std::ptrdiff_t>(cmd) + 1, extra.begin(), extra.end());
  return args;
}

struct Output {
  std::string path = "-";
  std::string format = "json";
  std::string report;
  int threads = 1;
};

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidParameter, "cannot write " + path);
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vnwlab: numerical experiments on the log-corrected von Neumann-Wigner potential"};
  app.set_version_flag("--version", vnwlab::version());
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Output out;
  std::string config_path;
  app.add_option("--config", config_path, "File of key=value lines; command-line flags override it");
  app.add_option("-o,--output", out.path, "Destination of the primary artifact ('-' for stdout)");
  app.add_option("--format", out.format, "json: the report envelope; csv: the command's table")
      ->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--report", out.report, "Also write the JSON envelope here");
  app.add_option("--threads", out.threads, "Worker threads (never changes results)")->check(CLI::PositiveNumber);

  vnwlab::EigOptions eig;
  double eig_nmin = 64, eig_ncap = 16777216;
  auto* c_eig = app.add_subcommand("eig", "Discrete eigenvalues beyond the band and their decay fit");
  c_eig->add_option("--potential", eig.potential, "Potential selector (zero, vnw:g, logvnw[:c], table:path, neg:...)");
  c_eig->add_option("--side", eig.side, "above or below the band")->check(CLI::IsMember({"above", "below"}));
  c_eig->add_option("--kmax", eig.k_max, "Largest eigenvalue index");
  c_eig->add_option("--tol", eig.tol, "Offset tolerance for N-doubling convergence");
  c_eig->add_option("--nmin", eig_nmin, "First truncation size");
  c_eig->add_option("--ncap", eig_ncap, "Largest truncation size");

  vnwlab::ZerosOptions zeros;
  double zeros_N = 1e6;
  auto* c_zeros = app.add_subcommand("zeros", "Sign changes of the shooting solution and the zero-gap statistic");
  c_zeros->add_option("--potential", zeros.potential, "Potential selector");
  c_zeros->add_option("--E", zeros.E, "Energy");
  c_zeros->add_option("--N", zeros_N, "Horizon (sites)");
  c_zeros->add_option("--k0", zeros.k0, "First zero index entering the gap minimum");

  vnwlab::MnCheckOptions mn;
  std::vector<double> mn_n;
  auto* c_mn = app.add_subcommand("mn-check", "Two-step matrix: closed form against product, det M = 1");
  c_mn->add_option("--n", mn_n, "Comma-separated two-step indices")->delimiter(',');
  c_mn->add_option("--c-log", mn.c_log, "Constant of the log correction");
  c_mn->add_flag("--asymptotics", mn.asymptotics, "Also check the basis asymptotics and the asymptotic-form bundle");

  vnwlab::PruferOptions pr;
  double pr_nmax = 1e6, pr_steps = 1e4, pr_nstart = 100;
  auto* c_pr = app.add_subcommand("prufer", "Tangent recursion: invariant region, positivity, consistency");
  c_pr->add_option("--nmax", pr_nmax, "Largest sampled two-step index");
  c_pr->add_option("--c-log", pr.c_log, "Constant of the log correction");
  c_pr->add_option("--random-t", pr.random_t, "Random t per sampled n");
  c_pr->add_option("--angles", pr.angles, "Random angles per sampled n");
  c_pr->add_option("--nstart", pr_nstart, "Start of the composed-step consistency run");
  c_pr->add_option("--steps", pr_steps, "Composed steps");
  c_pr->add_option("--seed", pr.seed, "Random seed");

  vnwlab::EmbeddedOptions em;
  double em_nmax = 1e6, em_lo = 1000, em_hi = 10000, em_stride = 1;
  bool em_no_oracle = false;
  auto* c_em = app.add_subcommand("embedded", "Square-summable solution at E = 0 by asymptotic integration");
  c_em->add_option("--nmax", em_nmax, "Horizon");
  c_em->add_option("--c-log", em.c_log, "Constant of the log correction");
  c_em->add_option("--bound", em.bound, "Required contraction at j0");
  c_em->add_option("--tol", em.tol, "Fixed-point iteration tolerance");
  c_em->add_flag("--no-oracle", em_no_oracle, "Skip the backward-recursion comparison");
  c_em->add_option("--oracle-lo", em_lo, "Comparison window start");
  c_em->add_option("--oracle-hi", em_hi, "Comparison window end");
  c_em->add_option("--stride", em_stride, "Write every stride-th site to the CSV");

  vnwlab::FitOptions fit;
  auto* c_fit = app.add_subcommand("fit", "Decay fit of a stored eigenvalue CSV");
  c_fit->add_option("--input", fit.input, "Eigenvalue CSV written by 'eig --format csv'")->required();

  auto* c_self = app.add_subcommand("selftest", "Closed-form and oracle checks of every module");

  try {
    std::vector<std::string> args = expand_args(argc, argv);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    std::ostringstream csv;
    std::ostream* table = out.format == "csv" ? &csv : nullptr;
    vnwlab::ReportEnvelope env;
    if (*c_eig) {
      eig.N_min = as_count(eig_nmin, "nmin");
      eig.N_cap = as_count(eig_ncap, "ncap");
      env = vnwlab::run_eig(eig, table);
    } else if (*c_zeros) {
      zeros.N = as_count(zeros_N, "N");
      env = vnwlab::run_zeros(zeros, table);
    } else if (*c_mn) {
      for (const double v : mn_n) mn.n.push_back(as_count(v, "n"));
      env = vnwlab::run_mn_check(mn, table);
    } else if (*c_pr) {
      pr.n_max = as_count(pr_nmax, "nmax");
      pr.steps = as_count(pr_steps, "steps");
      pr.n_start = as_count(pr_nstart, "nstart");
      env = vnwlab::run_prufer(pr, table);
    } else if (*c_em) {
      em.n_max = as_count(em_nmax, "nmax");
      em.oracle_lo = as_count(em_lo, "oracle-lo");
      em.oracle_hi = as_count(em_hi, "oracle-hi");
      em.stride = as_count(em_stride, "stride");
      em.oracle = !em_no_oracle;
      env = vnwlab::run_embedded(em, table);
    } else if (*c_fit) {
      env = vnwlab::run_fit(fit, table);
    } else if (*c_self) {
      env = vnwlab::run_selftest({out.threads}, table);
    }
    env.config["threads"] = out.threads;
    const std::string json = env.to_json().dump(2) + "\n";
    write_text(out.path, out.format == "csv" ? csv.str() : json);
    if (!out.report.empty()) write_text(out.report, json);
    for (const auto& c : env.checks) {
      if (!c.passed) std::cerr << "check failed: " << c.name << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
    }
    return env.all_passed() ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return vnwlab::exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
