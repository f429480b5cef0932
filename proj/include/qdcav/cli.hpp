#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace qdcav {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitIo = 3;

// Entry point behind the qdcav executable. args excludes the program name.
//
//   sweep           --config PATH [--workers N] [--n-max K] [--branch B] [--out PATH]
//   dressed-scan    --config PATH [--out PATH]
//   point           --config PATH [--n-max K] [--branch B] [--set name=value]...
//                   [--dump-rho PATH] [--dump-pair PATH]
//   validate-config --config PATH
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdcav
