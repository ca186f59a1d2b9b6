#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace packnn {

// Runs one command line (without the program name) against the given
// streams. Exit codes: 0 success, 1 internal error, 2 usage or file-format
// problem, 3 shape mismatch, 4 depth or magnitude budget exhausted,
// 5 verification failure.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace packnn
