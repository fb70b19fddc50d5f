#include "dlr/miner/line_diff.hpp"

#include <algorithm>

#include "dlr/common/text.hpp"

namespace dlr::miner {

LineDiff diff_lines(std::span<const std::string> before, std::span<const std::string> after) {
  const std::size_t n = before.size();
  const std::size_t m = after.size();
  std::vector<std::string> a, b;
  a.reserve(n);
  b.reserve(m);
  for (const auto& s : before) a.push_back(text::normalize_whitespace(s));
  for (const auto& s : after) b.push_back(text::normalize_whitespace(s));

  // suffix[i][j] = LCS length of a[i..] and b[j..]
  std::vector<std::vector<std::size_t>> suffix(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      suffix[i][j] = a[i] == b[j] ? suffix[i + 1][j + 1] + 1 : std::max(suffix[i + 1][j], suffix[i][j + 1]);
    }
  }

  LineDiff diff;
  std::size_t i = 0, j = 0;
  while (i < n && j < m) {
    if (a[i] == b[j] && suffix[i][j] == suffix[i + 1][j + 1] + 1) {
      ++i;
      ++j;
    } else if (suffix[i + 1][j] >= suffix[i][j + 1]) {
      diff.changed_before.push_back(i++);
    } else {
      diff.changed_after.push_back(j++);
    }
  }
  while (i < n) diff.changed_before.push_back(i++);
  while (j < m) diff.changed_after.push_back(j++);
  return diff;
}

}  // namespace dlr::miner
