#ifndef WCA_CLI_HPP
#define WCA_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

// Command line surface. run_cli takes the argument vector without the
// program name and returns the process exit code: 0 on success, nonzero with
// a diagnostic on the error stream otherwise. All commands are deterministic
// given their --seed, so identical invocations produce identical files.
//
// Commands: assign, build-coreset, cluster, verify, sensitivity-demo, net,
// plot. Run with --help for the flag reference.

namespace wca {

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args);  // stdout / stderr

}  // namespace wca

#endif
