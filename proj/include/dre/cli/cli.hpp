#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dre::cli {

// Runs one command line (without the program name). Returns the process
// exit status: 0 on success, 1 on a runtime failure, 2 on a usage or
// configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dre::cli
