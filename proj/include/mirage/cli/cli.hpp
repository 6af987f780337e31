#pragma once

#include <iosfwd>

namespace mirage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `mirage` tool. Data goes to files (or `out` for the
/// small record commands when no --out is given); diagnostics go to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mirage::cli
