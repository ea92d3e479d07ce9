#pragma once

#include <iosfwd>

namespace diffged {

/// Entry point of the `diffged` tool. Subcommands: gen-synthetic, oracle,
/// train, solve, evaluate, ablate. Returns the process exit code.
int run_cli(int argc, char** argv);

/// Same, with explicit output streams (used by tests).
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace diffged
