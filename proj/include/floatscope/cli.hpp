#pragma once

#include <ostream>

namespace floatscope {

// Exit codes: 0 clean, 2 findings, 1 errors.
int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

} // namespace floatscope
