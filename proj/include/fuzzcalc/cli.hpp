#ifndef FUZZCALC_CLI_HPP
#define FUZZCALC_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace fuzzcalc {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitEvaluation = 2,
  kExitNotDifferentiable = 3,
  kExitNoSolution = 4,
  kExitOutput = 5,
};

// Runs the tool on `args` (without the program name). Results go to `out`,
// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fuzzcalc

#endif  // FUZZCALC_CLI_HPP
