#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace artic {

enum ExitCode { kExitOk = 0, kExitValidation = 1, kExitIo = 2 };

/// Runs one `synth | segment | fit | ground | infer | eval` invocation.
/// `args` excludes the program name. Results go to `out` or files,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace artic
