#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace dlr {

// Single-statement bug taxonomy. Values P0..P12 follow the published index
// order; Unknown is the only fallback.
enum class BugPattern {
  ChangeOperator = 0,
  ChangeOperand,
  ChangeIdentifier,
  ChangeNumeral,
  ChangeCallerInFunction,
  ChangeUnaryOperator,
  OverloadMethodMoreArgs,
  OverloadMethodDeletedArgs,
  DifferentMethodSameArgs,
  MoreSpecificIf,
  LessSpecificIf,
  SwapArguments,
  SwapBooleanLiteral,
  Unknown,
};

inline constexpr int kNumKnownPatterns = 13;

inline constexpr std::array<BugPattern, kNumKnownPatterns> kKnownPatterns = {
    BugPattern::ChangeOperator,         BugPattern::ChangeOperand,
    BugPattern::ChangeIdentifier,       BugPattern::ChangeNumeral,
    BugPattern::ChangeCallerInFunction, BugPattern::ChangeUnaryOperator,
    BugPattern::OverloadMethodMoreArgs, BugPattern::OverloadMethodDeletedArgs,
    BugPattern::DifferentMethodSameArgs, BugPattern::MoreSpecificIf,
    BugPattern::LessSpecificIf,         BugPattern::SwapArguments,
    BugPattern::SwapBooleanLiteral,
};

// "CHANGE_OPERATOR", ..., "UNKNOWN".
std::string_view pattern_name(BugPattern p);

// "P0".."P12", or "UNKNOWN".
std::string_view pattern_index(BugPattern p);

// Accepts either the name or the index form.
std::optional<BugPattern> parse_pattern(std::string_view text);

}  // namespace dlr
