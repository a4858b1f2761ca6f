#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace limid::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitResource = 2;
inline constexpr int kExitUsage = 64;

/// Cap on the product of set sizes combined at one node, unless
/// LIMID_MAX_SET_SIZE is set.
inline constexpr std::uint64_t kDefaultMaxSetSize = 5'000'000;

/// Runs one command line. `args` excludes the program name. A file argument
/// of "-" (or none) reads the document from `in`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace limid::cli
