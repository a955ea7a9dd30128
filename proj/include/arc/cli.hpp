#ifndef ARC_CLI_HPP
#define ARC_CLI_HPP

#include <iosfwd>

namespace arc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitFlagged = 3;

// Entry point of the `arc` tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace arc

#endif  // ARC_CLI_HPP
