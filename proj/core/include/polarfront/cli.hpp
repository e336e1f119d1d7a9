#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polarfront {

/// Command-line front door. args excludes the program name. Returns the
/// process exit code; all failures print an error plus usage text and
/// return nonzero.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace polarfront
