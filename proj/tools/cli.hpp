#ifndef NERKIT_TOOLS_CLI_HPP
#define NERKIT_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace nerkit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kCheckFailed = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nerkit::cli

#endif  // NERKIT_TOOLS_CLI_HPP
