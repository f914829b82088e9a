#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sinnet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

/// Parses and executes one subcommand. `args` excludes the program name.
/// Results go to the declared output paths, or to `out` when none is given;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace sinnet::cli
