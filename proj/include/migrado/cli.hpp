#pragma once

#include <iosfwd>

namespace migrado {

inline constexpr int kExitOk = 0;
inline constexpr int kExitOperational = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `migrado` command. Output goes to `out`, one-line
/// errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace migrado
