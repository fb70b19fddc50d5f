#include "dlr/corpus/bug_pattern.hpp"

namespace dlr {

namespace {

constexpr std::array<std::string_view, kNumKnownPatterns + 1> kNames = {
    "CHANGE_OPERATOR",
    "CHANGE_OPERAND",
    "CHANGE_IDENTIFIER",
    "CHANGE_NUMERAL",
    "CHANGE_CALLER_IN_FUNCTION",
    "CHANGE_UNARY_OPERATOR",
    "OVERLOAD_METHOD_MORE_ARGS",
    "OVERLOAD_METHOD_DELETED_ARGS",
    "DIFFERENT_METHOD_SAME_ARGS",
    "MORE_SPECIFIC_IF",
    "LESS_SPECIFIC_IF",
    "SWAP_ARGUMENTS",
    "SWAP_BOOLEAN_LITERAL",
    "UNKNOWN",
};

constexpr std::array<std::string_view, kNumKnownPatterns + 1> kIndices = {
    "P0", "P1", "P2", "P3", "P4", "P5", "P6", "P7", "P8", "P9", "P10", "P11", "P12", "UNKNOWN",
};

}  // namespace

std::string_view pattern_name(BugPattern p) { return kNames[static_cast<std::size_t>(p)]; }

std::string_view pattern_index(BugPattern p) { return kIndices[static_cast<std::size_t>(p)]; }

std::optional<BugPattern> parse_pattern(std::string_view text) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (text == kNames[i] || text == kIndices[i]) return static_cast<BugPattern>(i);
  }
  return std::nullopt;
}

}  // namespace dlr
