#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace relaystab::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,     // bad flags, scenario, parameters or empty regions
  kExitInvariant = 3,  // a simulation broke packet conservation
};

/// Environment variable holding the default output directory.
inline constexpr const char* kOutDirEnv = "RELAYSTAB_OUT_DIR";

/// Runs one command line. `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace relaystab::cli
