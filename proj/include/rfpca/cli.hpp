#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rfpca::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Entry point behind the `rfpca` executable. `args` excludes the program
/// name. Artifacts go to --out when given, else to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rfpca::cli
