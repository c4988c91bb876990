// Command-line entry point: oracle-check, train, decode, eval, bench, trace.

#ifndef SRL_CLI_H_
#define SRL_CLI_H_

#include <ostream>

namespace srl {

// Exit codes: 0 success, 1 input/validation/usage failure, 2 internal
// assertion. Results go to `out`, JSON-lines logs to `log`.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& log);

}  // namespace srl

#endif  // SRL_CLI_H_
