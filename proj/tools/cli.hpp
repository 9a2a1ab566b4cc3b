#pragma once

#include <string>
#include <vector>

namespace cavsim {

/// Full command-line surface. Exit codes: 0 success, 1 config/CLI error,
/// 2 numeric failure, 3 oracle comparison FAIL.
int cli_main(int argc, const char* const* argv);

/// Convenience wrapper for tests; `args` excludes the program name.
int cli_main(const std::vector<std::string>& args);

}  // namespace cavsim
