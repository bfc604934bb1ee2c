// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace carleman::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Parses argv (argv[0] is the program name) and runs the selected
/// subcommand. Messages go to `out` and `err`; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Convenience overload for tests: args exclude the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Output checks applied before a command reports success. Both throw
// carleman::Error on a malformed file.

/// Header must equal `header`; every row needs header-many finite numbers.
void validate_csv(const std::filesystem::path& path, const std::vector<std::string>& header);

/// File must parse as a JSON object containing every key in `required`.
nlohmann::json validate_json(const std::filesystem::path& path, const std::vector<std::string>& required);

}  // namespace carleman::cli
