#pragma once

#include <iosfwd>

namespace agginc {

/// Exit codes: 0 success, 2 malformed input, 3 configuration error, 4 output failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace agginc
