#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gadgetforge::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kBudgetExhausted = 2;
inline constexpr int kFellOffEnd = 3;
inline constexpr int kNegative = 4;      // UnreachableWithinCap, NotEquivalent
inline constexpr int kInconclusive = 5;  // Unknown, InconclusiveAtCap

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gadgetforge::cli
