#pragma once

#include <span>
#include <string>
#include <vector>

namespace dlr::miner {

struct LineDiff {
  std::vector<std::size_t> changed_before;
  std::vector<std::size_t> changed_after;

  bool empty() const { return changed_before.empty() && changed_after.empty(); }
};

// Indices of lines outside a longest common subsequence of the two bodies,
// comparing whitespace-normalized text. Ties in the alignment resolve toward
// matching the earliest lines, so the output is deterministic.
LineDiff diff_lines(std::span<const std::string> before, std::span<const std::string> after);

}  // namespace dlr::miner
