#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vnwlab {

enum class PotentialFamily { Zero, CriticalVNW, LogCorrectedVNW, Table };

/// Symbolic half-line potential V(n), n >= 1. Immutable once built; copies
/// share the table storage.
///
///   Zero             V(n) = 0
///   CriticalVNW      V(n) = g (-1)^n / n                      (n >= 3)
///   LogCorrectedVNW  V(n) = ((-1)^n / n) (1 + c_log / ln n)    (n >= 3)
///   Table            V(n) = table[n - 1]
///
/// The analytic families vanish at n = 1, 2.
class PotentialSpec {
 public:
  static PotentialSpec zero();
  static PotentialSpec critical_vnw(double g);
  /// Throws Error{InvalidParameter} unless c_log > 1.
  static PotentialSpec log_corrected(double c_log = 2.0);
  static PotentialSpec table(std::vector<double> values);

  PotentialFamily family() const noexcept { return family_; }
  double coupling() const noexcept { return g_; }
  double c_log() const noexcept { return c_log_; }
  bool negated() const noexcept { return negated_; }
  std::span<const double> table_values() const noexcept;
  std::size_t table_size() const noexcept { return table_ ? table_->size() : 0; }

  /// Human-readable selector, e.g. "logvnw:2" or "neg:vnw:1.5".
  std::string describe() const;

 private:
  friend PotentialSpec negate(const PotentialSpec& spec);

  PotentialFamily family_ = PotentialFamily::Zero;
  double g_ = 0.0;
  double c_log_ = 2.0;
  std::shared_ptr<const std::vector<double>> table_;
  bool negated_ = false;
};

/// Split of the log-corrected potential into the critical part and the
/// envelope of the correction: V(n) = v0 + (-1)^n w. Both flip sign for a
/// negated spec.
struct VnwSplit {
  double v0 = 0.0;
  double w = 0.0;
};

/// Throws Error{InvalidParameter} for n < 1, Error{TableOutOfRange} past a table.
double eval_potential(const PotentialSpec& spec, std::int64_t n);

/// Throws Error{WrongFamily} unless the spec is LogCorrectedVNW.
VnwSplit split_vnw(const PotentialSpec& spec, std::int64_t n);

PotentialSpec negate(const PotentialSpec& spec);

/// Envelope W_n = c_log / (n ln n) of the log correction, n >= 2.
double log_envelope(double c_log, std::int64_t n);

/// sup_{1 <= n <= N} |V(n)|.
double sup_norm(const PotentialSpec& spec, std::int64_t N);

/// Writes V(first), ..., V(first + out.size() - 1). Values agree with
/// eval_potential to a few ulps; large-n logarithms are obtained from one
/// libm call per block plus a short series, which is what makes the
/// billion-site scalar loops affordable.
void fill_potential(const PotentialSpec& spec, std::int64_t first, std::span<double> out);

/// One value per line, site index implicit from the line number (n = 1 on
/// the first line). Blank lines and lines starting with '#' are rejected so
/// that indices stay unambiguous. Throws Error{ParseError} naming the line.
PotentialSpec load_table_file(const std::filesystem::path& path);
PotentialSpec parse_table_text(std::string_view text);

/// Parses a selector: "zero", "vnw:<g>", "logvnw" / "logvnw:<c>",
/// "table:<path>", optionally prefixed with "neg:".
/// Throws Error{InvalidParameter} or Error{ParseError}.
PotentialSpec parse_potential_selector(std::string_view selector);

}  // namespace vnwlab
