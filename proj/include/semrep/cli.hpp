// Command-line front end. All functionality is reachable in-process through
// run(), so tests can drive the tool without spawning processes.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semrep::cli {

// Executes one command (argv without the program name). Documents print as
// canonical serialization; reports are line-oriented UTF-8 on `out`;
// diagnostics go to `err`. A file argument of "-" reads `in`.
//
// Exit code: 0 success, 1 validation errors or merge conflicts, 2 usage or
// input errors.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace semrep::cli
