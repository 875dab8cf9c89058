#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pspin {

/// Runs the `pspin` command line. args[0] is the program name.
/// Exit codes: 0 success, 1 usage error (schema printed to `err`),
/// 2 budget or assertion failure.
int cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli(int argc, const char* const* argv);

/// The JSON config schema printed on usage errors.
std::string config_schema();

}  // namespace pspin
