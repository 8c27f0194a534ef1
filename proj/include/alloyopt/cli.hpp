#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace alloyopt {

/// Entry point of the `alloyopt` tool. Returns 0 on success, 2 on a usage error and
/// 1 on a runtime error (with a one-line diagnostic on `err`).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace alloyopt
