#pragma once

#include <iosfwd>

namespace vop {

// Exit status: 0 success, 1 I/O or config error, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vop
