#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scdc::cli {

/// `scdc synth|train|eval|predict|embed --config <path> [--out <path>] [--seed <n>]`.
/// Returns 0 on success, 2 on usage or configuration errors, 1 on runtime failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Routes logging to stderr at the level named by SCDC_LOG_LEVEL
/// (error, info or debug; default info).
void configure_logging();

}  // namespace scdc::cli
