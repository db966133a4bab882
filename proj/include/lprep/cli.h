#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lprep::cli {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
/// A checked inequality failed. The report is still written.
constexpr int kExitBoundViolated = 2;

/// Runs one command line (without the program name). The report goes to --output when given and to
/// `out` otherwise; usage errors and diagnostics go to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Worker count for sweeps: LPREP_THREADS if set and positive, else 1.
unsigned default_threads();

}  // namespace lprep::cli
