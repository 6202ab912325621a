#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fraglink::cli {

/// Runs one command. `args` excludes the program name. The JSON report goes
/// to `out`, diagnostics to `err`. Exit codes: 0 success, 1 usage error,
/// 2 validation error, 3 numeric error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fraglink::cli
