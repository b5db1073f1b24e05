#pragma once

#include <string>
#include <vector>

namespace topolow::cli {

/// Parses and runs one command line (without the program name). Returns the
/// process exit code: 0 success, 2 usage or input error, 3 validation
/// failure, 4 runtime failure.
int run(const std::vector<std::string>& args);

}  // namespace topolow::cli
