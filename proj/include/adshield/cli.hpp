#pragma once

#include <iosfwd>

namespace adshield {

// Exit codes: 0 success, 1 usage/I-O/parse error, 2 validation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adshield
