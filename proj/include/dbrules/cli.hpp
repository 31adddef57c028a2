#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace dbrules::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;
inline constexpr int kUsageError = 2;

// Environment variable supplying the default --workers value.
inline constexpr const char* kWorkersEnv = "DBRULES_WORKERS";

// Runs one command line (without the program name). Machine-readable output
// goes to `out`, progress and diagnostics to `err`.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dbrules::cli
