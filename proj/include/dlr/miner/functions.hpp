#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "dlr/miner/code_lexer.hpp"

namespace dlr::miner {

// A function found in a source file. Lines are 0-based and inclusive.
struct FunctionSpan {
  std::string name;
  int param_count = 0;
  std::size_t start_line = 0;
  std::size_t end_line = 0;
  std::vector<std::string> body_lines;
  // Whitespace-normalized declaration up to the body.
  std::string signature;
};

struct ExtractionResult {
  std::vector<FunctionSpan> functions;
  std::vector<std::string> warnings;
};

// Java: methods and constructors found by signature shape plus brace
// matching. Python: `def` headers plus indentation extent. Nested functions
// are reported as their own spans. Regions that cannot be delimited are
// skipped with a warning; the rest of the file is still processed.
ExtractionResult extract_functions(std::string_view file_text, Language lang);

}  // namespace dlr::miner
