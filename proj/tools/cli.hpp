#pragma once

#include <iosfwd>

namespace vulnreach::cli {

enum ExitCode : int {
    kOk = 0,
    kUserError = 1,
    kProviderError = 2,
    kVulnerable = 3,
};

/// Entry point of the `vulnreach` tool: `index`, `analyze` and `evaluate`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vulnreach::cli
