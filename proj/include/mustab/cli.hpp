#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mustab {

enum ExitCode : int { kExitPass = 0, kExitCounterexample = 1, kExitInputError = 2, kExitBudget = 3 };

/// Default perturbation budget: $MUSTAB_BUDGET when set, else 10^6.
/// Throws std::invalid_argument for a malformed value.
std::uint64_t default_budget();

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics and usage text to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mustab
