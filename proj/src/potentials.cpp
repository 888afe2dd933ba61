#include "vnwlab/potentials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vnwlab/errors.hpp"

namespace vnwlab {

namespace {

inline double parity_sign(std::int64_t n) noexcept { return (n & 1) ? -1.0 : 1.0; }

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double parse_number(std::string_view text, const std::string& context) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (text.empty() || ec != std::errc{} || ptr != last || !std::isfinite(value)) {
    throw Error(ErrorCode::ParseError, context + ": cannot parse '" + std::string(text) + "' as a real number");
  }
  return value;
}

}  // namespace

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::critical_vnw(double g) {
  if (!std::isfinite(g)) throw Error(ErrorCode::InvalidParameter, "coupling g must be finite");
  PotentialSpec s;
  s.family_ = PotentialFamily::CriticalVNW;
  s.g_ = g;
  return s;
}

PotentialSpec PotentialSpec::log_corrected(double c_log) {
  if (!(c_log > 1.0) || !std::isfinite(c_log)) {
    throw Error(ErrorCode::InvalidParameter, "log-corrected potential needs c_log > 1, got " + format_number(c_log));
  }
  PotentialSpec s;
  s.family_ = PotentialFamily::LogCorrectedVNW;
  s.c_log_ = c_log;
  return s;
}

PotentialSpec PotentialSpec::table(std::vector<double> values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::InvalidParameter, "table value at n=" + std::to_string(i + 1) + " is not finite");
    }
  }
  PotentialSpec s;
  s.family_ = PotentialFamily::Table;
  s.table_ = std::make_shared<const std::vector<double>>(std::move(values));
  return s;
}

std::span<const double> PotentialSpec::table_values() const noexcept {
  if (!table_) return {};
  return {table_->data(), table_->size()};
}

std::string PotentialSpec::describe() const {
  std::string base;
  switch (family_) {
    case PotentialFamily::Zero: base = "zero"; break;
    case PotentialFamily::CriticalVNW: base = "vnw:" + format_number(g_); break;
    case PotentialFamily::LogCorrectedVNW: base = "logvnw:" + format_number(c_log_); break;
    case PotentialFamily::Table: base = "table[" + std::to_string(table_size()) + "]"; break;
  }
  return negated_ ? "neg:" + base : base;
}

PotentialSpec negate(const PotentialSpec& spec) {
  PotentialSpec s = spec;
  s.negated_ = !spec.negated_;
  return s;
}

double log_envelope(double c_log, std::int64_t n) {
  const double x = static_cast<double>(n);
  return c_log / (x * std::log(x));
}

double eval_potential(const PotentialSpec& spec, std::int64_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidParameter, "site index must be >= 1, got " + std::to_string(n));
  double v = 0.0;
  switch (spec.family()) {
    case PotentialFamily::Zero:
      break;
    case PotentialFamily::CriticalVNW:
      if (n >= 3) v = spec.coupling() * parity_sign(n) / static_cast<double>(n);
      break;
    case PotentialFamily::LogCorrectedVNW:
      if (n >= 3) {
        // Same two terms split_vnw returns, so recomposition is exact.
        const double sg = parity_sign(n);
        v = sg / static_cast<double>(n) + sg * log_envelope(spec.c_log(), n);
      }
      break;
    case PotentialFamily::Table: {
      const auto t = spec.table_values();
      if (static_cast<std::size_t>(n) > t.size()) {
        throw Error(ErrorCode::TableOutOfRange,
                    "site " + std::to_string(n) + " beyond table of size " + std::to_string(t.size()));
      }
      v = t[static_cast<std::size_t>(n - 1)];
      break;
    }
  }
  return spec.negated() ? -v : v;
}

VnwSplit split_vnw(const PotentialSpec& spec, std::int64_t n) {
  if (spec.family() != PotentialFamily::LogCorrectedVNW) {
    throw Error(ErrorCode::WrongFamily, "split_vnw needs a log-corrected potential, got " + spec.describe());
  }
  if (n < 3) throw Error(ErrorCode::InvalidParameter, "split_vnw needs n >= 3");
  VnwSplit s;
  s.v0 = parity_sign(n) / static_cast<double>(n);
  s.w = log_envelope(spec.c_log(), n);
  if (spec.negated()) {
    s.v0 = -s.v0;
    s.w = -s.w;
  }
  return s;
}

double sup_norm(const PotentialSpec& spec, std::int64_t N) {
  if (N < 1) return 0.0;
  switch (spec.family()) {
    case PotentialFamily::Zero:
      return 0.0;
    case PotentialFamily::CriticalVNW:
      return N >= 3 ? std::fabs(spec.coupling()) / 3.0 : 0.0;
    case PotentialFamily::LogCorrectedVNW:
      // |V(n)| is strictly decreasing for n >= 3.
      return N >= 3 ? std::fabs(eval_potential(spec, 3)) : 0.0;
    case PotentialFamily::Table: {
      const auto t = spec.table_values();
      if (static_cast<std::size_t>(N) > t.size()) {
        throw Error(ErrorCode::TableOutOfRange,
                    "truncation " + std::to_string(N) + " beyond table of size " + std::to_string(t.size()));
      }
      double m = 0.0;
      for (std::int64_t i = 0; i < N; ++i) m = std::max(m, std::fabs(t[static_cast<std::size_t>(i)]));
      return m;
    }
  }
  return 0.0;
}

void fill_potential(const PotentialSpec& spec, std::int64_t first, std::span<double> out) {
  if (first < 1) throw Error(ErrorCode::InvalidParameter, "site index must be >= 1");
  const std::int64_t count = static_cast<std::int64_t>(out.size());
  switch (spec.family()) {
    case PotentialFamily::Zero:
      std::fill(out.begin(), out.end(), 0.0);
      return;
    case PotentialFamily::CriticalVNW: {
      const double g = spec.negated() ? -spec.coupling() : spec.coupling();
      for (std::int64_t k = 0; k < count; ++k) {
        const std::int64_t n = first + k;
        out[static_cast<std::size_t>(k)] = n >= 3 ? g * parity_sign(n) / static_cast<double>(n) : 0.0;
      }
      return;
    }
    case PotentialFamily::LogCorrectedVNW: {
      constexpr std::int64_t block = 256;
      constexpr std::int64_t series_threshold = std::int64_t{1} << 20;
      const double c = spec.c_log();
      const double sign = spec.negated() ? -1.0 : 1.0;
      std::int64_t k = 0;
      for (; k < count && first + k < series_threshold; ++k) {
        out[static_cast<std::size_t>(k)] = eval_potential(spec, first + k);
      }
      while (k < count) {
        const std::int64_t base = first + k;
        const std::int64_t len = std::min(block, count - k);
        const double b = static_cast<double>(base);
        const double log_base = std::log(b);
        const double inv_base = 1.0 / b;
        for (std::int64_t j = 0; j < len; ++j) {
          // ln(base + j) = ln(base) + log1p(x), x = j / base <= 2^-12: the
          // quartic truncation error is below 1e-19.
          const double x = static_cast<double>(j) * inv_base;
          const double log_n = log_base + x * (1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x)));
          const std::int64_t n = base + j;
          const double x_n = static_cast<double>(n);
          const double sg = sign * parity_sign(n);
          out[static_cast<std::size_t>(k + j)] = sg / x_n + sg * (c / (x_n * log_n));
        }
        k += len;
      }
      return;
    }
    case PotentialFamily::Table: {
      const auto t = spec.table_values();
      if (static_cast<std::size_t>(first - 1 + count) > t.size()) {
        throw Error(ErrorCode::TableOutOfRange, "requested sites beyond table of size " + std::to_string(t.size()));
      }
      const double sign = spec.negated() ? -1.0 : 1.0;
      for (std::int64_t k = 0; k < count; ++k) {
        out[static_cast<std::size_t>(k)] = sign * t[static_cast<std::size_t>(first - 1 + k)];
      }
      return;
    }
  }
}

PotentialSpec parse_table_text(std::string_view text) {
  std::vector<double> values;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    ++line_no;
    pos = end + 1;
    const bool last_line = end == text.size() || pos >= text.size();
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      if (last_line) break;
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty line");
    }
    values.push_back(parse_number(line, "line " + std::to_string(line_no)));
  }
  if (values.empty()) throw Error(ErrorCode::ParseError, "table contains no values");
  return PotentialSpec::table(std::move(values));
}

PotentialSpec load_table_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open table file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_table_text(buffer.str());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

PotentialSpec parse_potential_selector(std::string_view selector) {
  bool neg = false;
  if (selector.starts_with("neg:")) {
    neg = true;
    selector.remove_prefix(4);
  }
  PotentialSpec spec;
  if (selector == "zero") {
    spec = PotentialSpec::zero();
  } else if (selector == "logvnw") {
    spec = PotentialSpec::log_corrected(2.0);
  } else if (selector.starts_with("logvnw:")) {
    spec = PotentialSpec::log_corrected(parse_number(selector.substr(7), "potential selector"));
  } else if (selector.starts_with("vnw:")) {
    spec = PotentialSpec::critical_vnw(parse_number(selector.substr(4), "potential selector"));
  } else if (selector.starts_with("table:")) {
    spec = load_table_file(std::filesystem::path(std::string(selector.substr(6))));
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown potential selector '" + std::string(selector) + "'");
  }
  return neg ? negate(spec) : spec;
}

}  // namespace vnwlab
