#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace semlabels {

inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDataError = 2,
  kExitNumericFailure = 3,
};

/// Runs one subcommand. args[0] is the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semlabels
