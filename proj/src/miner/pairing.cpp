#include "dlr/miner/pairing.hpp"

#include <algorithm>
#include <map>
#include <string>

namespace dlr::miner {

namespace {

using Key = std::pair<std::string, int>;

std::map<Key, std::vector<std::size_t>> index_by_key(std::span<const FunctionSpan> spans) {
  std::map<Key, std::vector<std::size_t>> index;
  for (std::size_t i = 0; i < spans.size(); ++i) index[{spans[i].name, spans[i].param_count}].push_back(i);
  return index;
}

}  // namespace

PairingResult pair_functions(std::span<const FunctionSpan> before, std::span<const FunctionSpan> after) {
  PairingResult result;
  const auto before_index = index_by_key(before);
  const auto after_index = index_by_key(after);
  for (const auto& [key, positions] : before_index) {
    const auto it = after_index.find(key);
    if (positions.size() > 1 || (it != after_index.end() && it->second.size() > 1)) {
      ++result.ambiguous;
      continue;
    }
    if (it == after_index.end()) {
      ++result.unmatched;
      continue;
    }
    result.pairs.emplace_back(before[positions.front()], after[it->second.front()]);
  }
  for (const auto& [key, positions] : after_index) {
    if (!before_index.contains(key)) ++result.unmatched;
  }
  std::sort(result.pairs.begin(), result.pairs.end(), [](const auto& a, const auto& b) {
    return a.first.start_line < b.first.start_line;
  });
  return result;
}

}  // namespace dlr::miner
