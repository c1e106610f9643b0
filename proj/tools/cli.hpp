#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "oconnell/verify.hpp"

namespace oconnell::cli {

constexpr int kFormatVersion = 1;

enum Exit { ok = 0, verification_failed = 1, usage = 2, numerical = 3 };

// args excludes the program name. Output goes to `out` unless --out is given.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// `simulate` runners for the determinism check: in this process with
// OCONNELL_THREADS set, or by launching the executable.
SimulateRunner in_process_runner();
SimulateRunner subprocess_runner(const std::string& executable);

}  // namespace oconnell::cli
