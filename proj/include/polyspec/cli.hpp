#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace polyspec::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kNumerical = 3, kLinearAlgebra = 4 };

/// Runs one invocation. `args` excludes the program name. Rows go to `out`
/// (or to --output), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 17 significant digits; "inf", "-inf" and "nan" for non-finite values.
std::string format_number(double v);

}  // namespace polyspec::cli
