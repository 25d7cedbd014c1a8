#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace emotrade {

// Runs one subcommand. `args` excludes the program name. Returns the process
// exit status; failures print a single line
// `error: command=<cmd> stage=<stage>: <message>` to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Flat `key = value` file; blank lines and `#` comments are ignored.
std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path);

}  // namespace emotrade
