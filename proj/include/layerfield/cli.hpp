#pragma once

namespace layerfield::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { ok = 0, validation_failure = 1, not_converged = 2, io_failure = 3 };

/// Entry point of the `layerfield` tool: validate | scan | balance.
int run(int argc, char** argv);

}  // namespace layerfield::cli
