#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace pbcising::cli {

inline constexpr const char* kCacheDirEnv = "PBCISING_CACHE_DIR";

// Flat "key = value" experiment file; '#' starts a comment, lists are
// comma-separated. Throws ParseError on malformed lines or repeated keys.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Entry point behind the `pbcising` binary. args excludes the program name.
// Returns the process exit code: 0 ok, 2 usage, 3 guard, 4 numerical,
// 5 invariant violation (or failed self-test).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Small-size oracle comparisons; prints one PASS/FAIL line per check.
int selftest(std::ostream& out, unsigned threads);

}  // namespace pbcising::cli
