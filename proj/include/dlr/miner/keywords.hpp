#pragma once

#include <array>
#include <string_view>

namespace dlr::miner {

inline constexpr std::array<std::string_view, 10> kBugFixKeywords = {
    "error", "bug", "fix", "issue", "mistake", "incorrect", "fault", "defect", "flaw", "type"};

// True iff some word of the lowercased message starts with a keyword, so
// "Fixes" and "fixed" match while "suffix" does not.
bool is_bugfix_commit(std::string_view message);

}  // namespace dlr::miner
