#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmf {

// args excludes the program name. Errors go to `err` as one line
// "error:<class>: <detail>" and select the exit code (2 config, 3 data,
// 4 numerical).
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hmf
