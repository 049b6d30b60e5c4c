#pragma once

#include <ostream>

namespace dialectid {

// Exit codes shared by every subcommand.
constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;  // runtime or data error
constexpr int kExitUsage = 2;    // bad arguments

// Entry point of the `dialectid` tool. Subcommands: synth-corpus, extract,
// train, evaluate, grid-search, report, importance. Normal output goes to
// `out`, diagnostics and usage text to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dialectid
