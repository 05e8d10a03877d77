#pragma once
// Subcommand orchestration behind the boundary-lab CLI.
//
//   boundary-lab <simulate|convergence|pindown|entropy-budget|avez|sweep-m>
//                --config <file> [--out <dir>] [--seed <u64>] [--threads <k>]
//
// Every run writes its tables (and charts, per the config's formats) plus a
// manifest.json into the output directory.  Results are a deterministic
// function of (config, seed); the worker count never changes a byte.
//
// Exit codes: 0 pass, 1 fail (an asserted property was violated, or a
// runtime error), 2 inconclusive (bands too wide to decide), 3 config error.

#include <string>
#include <vector>

namespace boundarylab::harness {

inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitConfigError = 3;

/// Full CLI entry point; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace boundarylab::harness
