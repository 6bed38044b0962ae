#pragma once

#include <ostream>

namespace warm {

// Command-line entry point. Exit codes: 0 success, 1 usage/parameter error,
// 2 runtime or certification failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace warm
