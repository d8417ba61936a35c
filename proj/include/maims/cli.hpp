#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "maims/records.hpp"
#include "maims/scales.hpp"

namespace maims::cli {

/// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kViolations = 1,  // validate found problems, show-trace found no such post
    kConfigError = 2, // bad flags, missing or malformed inputs
    kBackendError = 3 // a model backend was unreachable or refused
};

/// Entry point shared by the `maims` binary and the Python module.
/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Human-readable view of one trace record. Option texts are shown when `scale`
/// is given.
std::string render_trace(const FinalRecord& record, const MentalScale* scale = nullptr);

} // namespace maims::cli
