#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vstkit::cli {

// Exit codes: 0 success, 1 usage error, 2 runtime error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vstkit::cli
