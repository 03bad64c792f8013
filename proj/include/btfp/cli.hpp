#pragma once

#include <string>
#include <vector>

namespace btfp::cli {

// Exit codes: 0 success, 1 stage failure, 2 usage error.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);  // args exclude the program name

} // namespace btfp::cli
