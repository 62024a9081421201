#pragma once

#include <string>
#include <vector>

namespace horizon {

// Exit codes: 0 resolved, 1 internal error, 2 any Inconclusive verdict,
// 64 usage error, 74 I/O error.
int run_cli(const std::vector<std::string>& args);

}  // namespace horizon
