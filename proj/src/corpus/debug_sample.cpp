#include "dlr/corpus/debug_sample.hpp"

#include <algorithm>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"

namespace dlr {

std::vector<std::size_t> DebugSample::buggy_lines() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < line_labels.size(); ++i) {
    if (line_labels[i]) out.push_back(i);
  }
  return out;
}

std::string DebugSample::repair_target() const {
  return function_label ? text::join_lines(after_lines) : std::string{};
}

void validate(const DebugSample& sample) {
  if (sample.before_lines.empty()) throw DataError("sample has no lines");
  if (sample.line_labels.size() != sample.before_lines.size()) {
    throw DataError("line_labels length " + std::to_string(sample.line_labels.size()) +
                    " != line count " + std::to_string(sample.before_lines.size()));
  }
  const auto positives = std::count_if(sample.line_labels.begin(), sample.line_labels.end(),
                                       [](std::uint8_t v) { return v != 0; });
  if (sample.function_label != (positives > 0)) {
    throw DataError("function_label disagrees with line_labels");
  }
  if (!sample.function_label && sample.after_lines != sample.before_lines) {
    throw DataError("clean sample must have after == before");
  }
  if (sample.pattern != BugPattern::Unknown && positives != 1) {
    throw DataError("pattern tag requires exactly one buggy line");
  }
}

DebugSample make_buggy_sample(std::vector<std::string> before, std::vector<std::string> after,
                              const std::vector<std::size_t>& buggy_lines, BugPattern pattern,
                              CommitMeta meta) {
  DebugSample s;
  s.line_labels.assign(before.size(), 0);
  for (auto i : buggy_lines) {
    if (i >= before.size()) throw DataError("buggy line index out of range");
    s.line_labels[i] = 1;
  }
  s.before_lines = std::move(before);
  s.after_lines = std::move(after);
  s.function_label = !buggy_lines.empty();
  s.pattern = pattern;
  s.meta = std::move(meta);
  validate(s);
  return s;
}

DebugSample make_clean_sample(std::vector<std::string> lines, CommitMeta meta) {
  DebugSample s;
  s.line_labels.assign(lines.size(), 0);
  s.after_lines = lines;
  s.before_lines = std::move(lines);
  s.function_label = false;
  s.meta = std::move(meta);
  validate(s);
  return s;
}

}  // namespace dlr
