#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace elicit::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one pipeline command. Returns the process exit status: 0 on success,
/// 1 when the command fails (validation, insufficient data, bad input), 2 on
/// usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace elicit::cli
