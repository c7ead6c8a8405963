#pragma once

#include <iosfwd>

namespace selfcal {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumerical = 2;

/// Entry point of the `selfcal` tool. Machine-readable key=value summaries go
/// to `out`, human messages to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace selfcal
