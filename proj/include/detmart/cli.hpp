#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace detmart::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kVerifyFailed = 1;
inline constexpr int kBadInput = 2;
inline constexpr int kNumeric = 3;

// args excludes the program name
int main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace detmart::cli
