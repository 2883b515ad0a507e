#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covchan::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kIncompatible = 2,
  kImplementationFalsified = 3,
};

/// Entry point shared by the binary and the in-process tests. `args`
/// excludes the program name. Reports go to --out (atomically) or `out`;
/// diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covchan::cli
