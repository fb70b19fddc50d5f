#include "dlr/corpus/sentinel.hpp"

#include "dlr/common/error.hpp"

namespace dlr {

std::string insert_line_sentinels(const std::vector<std::string>& lines) {
  if (lines.empty()) throw DataError("cannot insert sentinels into an empty function");
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find(kSentinelMarker) != std::string::npos) {
      throw DataError("line " + std::to_string(i) + " already contains the sentinel marker");
    }
    if (i > 0) out.push_back(' ');
    out += lines[i];
    out += kSentinelText;
  }
  return out;
}

std::vector<std::string> strip_line_sentinels(std::string_view text) {
  std::vector<std::string> lines;
  while (!text.empty()) {
    const auto pos = text.find(kSentinelText);
    if (pos == std::string_view::npos) {
      lines.emplace_back(text);
      break;
    }
    lines.emplace_back(text.substr(0, pos));
    text.remove_prefix(pos + kSentinelText.size());
    if (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  }
  return lines;
}

}  // namespace dlr
