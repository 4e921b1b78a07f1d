#ifndef COMPSPLIT_CLI_HPP
#define COMPSPLIT_CLI_HPP

#include <string>
#include <vector>

namespace compsplit {

// Runs the compsplit command line (args excludes the program name).
// Exit codes: 0 success, 1 runtime/data error, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace compsplit

#endif
