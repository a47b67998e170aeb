#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace afford::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kModelError = 3;

/// Runs one subcommand (`synth`, `train`, `infer`, `eval`). `args` excludes the
/// program name. Summary goes to `out`, a single "error: ..." line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace afford::cli
