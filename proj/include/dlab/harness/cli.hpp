#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dlab::harness {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one `dlab` subcommand. Returns 0 on success, 1 on usage,
/// validation or role-guard errors, 2 on runtime errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace dlab::harness
