#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridsim {

// Exit codes: 0 success, 1 invalid input or failed run, 2 usage error.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace gridsim
