#pragma once

namespace entlab::cli {

// Parses argv, runs one subcommand, writes the report to --out (or stdout)
// and returns the process exit code: 0 success, 2 validation error,
// 3 numeric failure. Never throws.
int dispatch(int argc, const char* const* argv);

}  // namespace entlab::cli
