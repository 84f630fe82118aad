#pragma once

#include <string>
#include <vector>

#include "mdemap/error.hpp"

namespace mdemap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitIo = 2;
inline constexpr int kExitData = 3;

int exit_code_for(ErrorKind kind);

/// Runs `mdemap <command> [options]`; diagnostics go to standard error.
/// Commands: compute, combine, evaluate, synth, export.
int run(int argc, const char* const* argv);
/// Same, with `args` excluding the program name.
int run(const std::vector<std::string>& args);

}  // namespace mdemap::cli
