#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace t1moco::cli {

inline constexpr const char* kDiagnosticSchema = "t1moco-diagnostic";

enum ExitCode {
    kSuccess = 0,
    kFailure = 1,
    kUsage = 2,
};

/// Runs the t1moco command line. `args` excludes the program name. Errors
/// are reported on `err` as a one-line JSON diagnostic; usage errors also
/// print the help text. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace t1moco::cli
