#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace weblin {

/// Exit codes: 0 YES (or success), 1 NO, 2 INCONCLUSIVE, 3 usage error,
/// 4 expression parse error, 5 runtime failure (sampling, linearizer, I/O).
enum ExitCode { exit_yes = 0, exit_no = 1, exit_inconclusive = 2, exit_usage = 3, exit_parse = 4, exit_runtime = 5 };

/// args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace weblin
