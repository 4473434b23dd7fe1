#pragma once

namespace gt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNotGolden = 3;

/// Entry point of the `gt` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);

} // namespace gt
