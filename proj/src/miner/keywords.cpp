#include "dlr/miner/keywords.hpp"

#include <cctype>

#include "dlr/common/text.hpp"

namespace dlr::miner {

bool is_bugfix_commit(std::string_view message) {
  const std::string lower = text::to_lower(message);
  std::size_t i = 0;
  while (i < lower.size()) {
    while (i < lower.size() && !std::isalnum(static_cast<unsigned char>(lower[i]))) ++i;
    const std::size_t start = i;
    while (i < lower.size() && std::isalnum(static_cast<unsigned char>(lower[i]))) ++i;
    const std::string_view word(lower.data() + start, i - start);
    for (auto keyword : kBugFixKeywords) {
      if (word.starts_with(keyword)) return true;
    }
  }
  return false;
}

}  // namespace dlr::miner
