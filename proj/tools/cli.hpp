// Command-line front end. run_cli takes the arguments after the program
// name and returns the process exit code.
#ifndef GAUCHO_TOOLS_CLI_HPP
#define GAUCHO_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace gaucho::cli {

enum ExitCode : int {
  kOk = 0,
  kIoError = 1,
  kPartialParse = 2,
  kPropertyFailure = 3,
  kUsage = 64,
  kBadData = 65,
};

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gaucho::cli

#endif  // GAUCHO_TOOLS_CLI_HPP
