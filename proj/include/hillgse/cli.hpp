#pragma once

namespace hillgse::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2, kVerifyFailed = 3 };

/// Entry point of the hill-gse tool. Never throws; failures map to the exit
/// codes above with a message on stderr.
int run(int argc, char** argv);

}  // namespace hillgse::cli
