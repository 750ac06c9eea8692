#pragma once

#include <iosfwd>

namespace pbftrel::cli {

// Exit codes: 0 success, 1 invalid input, 2 numerical failure. Failures print a single
// "error: <reason>" line on `err`.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace pbftrel::cli
