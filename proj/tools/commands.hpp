#pragma once

#include <string>

#include "run_config.hpp"

namespace shortrate::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInvalidInput = 1,
    kInfinite = 2,     // feasibility verdict Infinite, or the J divergence guard fired
    kUnknown = 3,      // feasibility verdict Unknown
    kSolverAbort = 4,  // monotonicity / bound / numerical failure inside a solve
    kNoSolution = 5,   // simulate / estimate / residual without a solution file
    kZScore = 7,       // estimate finished with |z| > 3
};

struct Invocation {
    std::string command;  // feasibility | solve | solve-b | solve-c | simulate | estimate | residual
    RunConfig config;
    Settings settings;    // resolved keys, echoed into the run record
};

/// Runs one subcommand, printing a summary to stdout. Library errors escape as exceptions.
int run_command(const Invocation& inv);

/// run_command with errors mapped to exit codes and reported on stderr.
int run_guarded(const Invocation& inv);

}  // namespace shortrate::cli
