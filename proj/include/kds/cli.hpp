#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace kds {

// Command-line entry point; parses args, resolves the configuration and
// dispatches to the pipeline stage. Exit codes: 0 success, 2 config error,
// 3 backend error, 4 missing artifact, 1 anything else. Failures emit one
// machine-parseable JSON line on err.
int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

int run_cli(int argc, const char* const* argv);

} // namespace kds
