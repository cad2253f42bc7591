#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace billiard::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "BILLIARD_OUT_DIR";

/// Parses args (args[0] is the program name) and runs the command.
/// Returns 0 on success, 2 on usage errors and 1 on runtime failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace billiard::cli
