#pragma once

#include <iosfwd>

namespace pinr {

// Command-line front end. Results go to `out`, the resolved configuration and
// diagnostics to `err`. Returns 0 on success, 2 on a usage error and 1 on a
// runtime error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pinr
