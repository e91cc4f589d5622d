#pragma once

#include <ostream>

namespace dlvdb {

/// Entry point of the `dlvdb` tool: subcommands run, check and bench.
/// Reports go to `out`, diagnostics to `err`. Returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlvdb
