#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dlr {

inline constexpr std::string_view kSentinelMarker = "[SEP]";
// Surface text of one sentinel as it appears after a line.
inline constexpr std::string_view kSentinelText = " [SEP]";

// Appends a sentinel to every line and joins with single spaces:
// {"int a = 1;", "return a;"} -> "int a = 1; [SEP] return a; [SEP]".
// Throws DataError for empty input or lines already containing the marker.
std::string insert_line_sentinels(const std::vector<std::string>& lines);

// Inverse of insert_line_sentinels.
std::vector<std::string> strip_line_sentinels(std::string_view text);

}  // namespace dlr
