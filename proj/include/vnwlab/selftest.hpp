#pragma once

// Library-level invariant suite: the cheap closed-form and oracle examples of
// every module, each reported as a named pass/fail entry.

#include <vector>

#include "vnwlab/report.hpp"

namespace vnwlab {

/// Runs every check; exceptions inside a check are caught and reported as a
/// failure of that check. `threads` is used by the spectrum-symmetry entry.
std::vector<CheckResult> selftest_checks(int threads = 1);

}  // namespace vnwlab
