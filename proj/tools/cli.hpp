// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ranging::cli {

// Exit codes.
inline constexpr int ok = 0;
inline constexpr int failure = 1;  // runtime error or a failed check
inline constexpr int usage = 2;    // bad flags, bad config, unknown names

// Whole command line minus argv[0]. Data goes to `out` and to files under --outdir,
// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ranging::cli
