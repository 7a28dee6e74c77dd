#pragma once

#include <iosfwd>

namespace rsjd {

/// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // validation failure, measure rejected
inline constexpr int kExitUsage = 2;    // I/O, parse error, unknown command

/// Runs `rsjd <command> [options]`. Results go to --out (or `out`) when
/// given, otherwise to `out`; messages go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rsjd
