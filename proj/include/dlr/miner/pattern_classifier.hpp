#pragma once

#include <string_view>

#include "dlr/corpus/bug_pattern.hpp"
#include "dlr/miner/code_lexer.hpp"

namespace dlr::miner {

// Classifies a single-line change by token-level matching rules, checked in
// a fixed precedence order; the first rule that matches wins:
//   SWAP_BOOLEAN_LITERAL, CHANGE_UNARY_OPERATOR, CHANGE_OPERATOR,
//   CHANGE_NUMERAL, SWAP_ARGUMENTS, MORE_SPECIFIC_IF, LESS_SPECIFIC_IF,
//   OVERLOAD_METHOD_MORE_ARGS, OVERLOAD_METHOD_DELETED_ARGS,
//   CHANGE_CALLER_IN_FUNCTION, DIFFERENT_METHOD_SAME_ARGS, CHANGE_OPERAND,
//   CHANGE_IDENTIFIER.
// Never throws; anything unmatched or unlexable is Unknown.
BugPattern classify_pattern(std::string_view before_line, std::string_view after_line,
                            Language lang = Language::Java);

}  // namespace dlr::miner
