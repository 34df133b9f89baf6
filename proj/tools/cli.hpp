#pragma once

#include <string>
#include <vector>

namespace ambool {

/// Command-line front end. `args` excludes the program name. Returns 0 on
/// success, 2 when the Boolean fails (the report is still written) and 1 for
/// usage or I/O errors.
int run_cli(const std::vector<std::string>& args);

}  // namespace ambool
