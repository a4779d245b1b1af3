#pragma once

#include <cstdint>

#include "json.hpp"

namespace adshield {

// Runs one honest fetch -> display -> touch -> token -> report pipeline on a
// fresh seeded platform and returns the server's verdict with the wire report.
nlohmann::json run_demo(std::uint64_t seed = 0);

}  // namespace adshield
