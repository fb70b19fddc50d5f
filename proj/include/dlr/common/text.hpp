#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace dlr::text {

// Splits on '\n' keeping empty pieces, so split_lines("") == {""} and
// join_lines(split_lines(s)) == s.
std::vector<std::string> split_lines(std::string_view s);
std::string join_lines(const std::vector<std::string>& lines);

std::string_view trim(std::string_view s);

// Collapses every whitespace run to one space and strips both ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

// Removes the longest leading-whitespace prefix shared by all non-blank lines.
std::vector<std::string> dedent(const std::vector<std::string>& lines);

}  // namespace dlr::text
