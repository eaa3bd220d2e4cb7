// Command-line front end: generate, spectra, analyze, ida, compare, verify.
#pragma once

#include <cstdint>
#include <iosfwd>

namespace etforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
/// Artifacts were written but the run stalled (generate) or missed its gate (verify).
inline constexpr int kExitStalled = 2;

inline constexpr std::uint64_t kDefaultSeed = 1;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace etforge::cli
