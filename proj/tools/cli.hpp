#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace npr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModel = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the `npr` binary and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

}  // namespace npr::cli
