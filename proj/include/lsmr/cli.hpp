#pragma once

#include <ostream>

namespace lsmr::cli {

// Exit codes shared by all subcommands.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;     // a checked property or expectation does not hold
inline constexpr int kBadInput = 2;   // config, trace or argument error
inline constexpr int kDeadlock = 3;

// Entry point of the lsmr tool, with streams injectable for tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lsmr::cli
