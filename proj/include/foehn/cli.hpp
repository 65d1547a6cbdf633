#pragma once

namespace foehn {

/// Command-line entry point. Returns 0 on success, 1 on a usage error and 2
/// when the data or an estimation step fails. Log lines go to standard error;
/// the level is read from FOEHN_LOG_LEVEL (trace, debug, info, warn, error, off).
int run_cli(int argc, char** argv);

} // namespace foehn
