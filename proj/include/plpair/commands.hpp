// Command-line entry point: simulate, fit, predict, design.
#pragma once

#include <iosfwd>

namespace plpair {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 2,
    exit_data = 3,
    exit_nonconvergence = 4,
};

/// Runs one command line. Output directory defaults to $PLPAIR_OUTPUT_DIR,
/// else the working directory.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plpair
