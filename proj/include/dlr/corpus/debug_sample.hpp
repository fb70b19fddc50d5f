#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlr/corpus/bug_pattern.hpp"

namespace dlr {

struct CommitMeta {
  std::string project;
  std::string commit_id;
  std::string commit_message;

  bool operator==(const CommitMeta&) const = default;
};

// One function-level training instance: the input function, per-line bug
// labels (1 = buggy), and the fixed function. For clean samples after_lines
// mirrors before_lines and the repair target is empty.
struct DebugSample {
  std::vector<std::string> before_lines;
  std::vector<std::string> after_lines;
  std::vector<std::uint8_t> line_labels;
  bool function_label = false;
  BugPattern pattern = BugPattern::Unknown;
  CommitMeta meta;

  std::size_t num_lines() const { return before_lines.size(); }
  std::vector<std::size_t> buggy_lines() const;

  // Repair target text: the fixed function joined by '\n', or "" when clean.
  std::string repair_target() const;

  bool operator==(const DebugSample&) const = default;
};

// Throws DataError naming the first violated invariant.
void validate(const DebugSample& sample);

// Builds a buggy sample with the given buggy line indices.
DebugSample make_buggy_sample(std::vector<std::string> before, std::vector<std::string> after,
                              const std::vector<std::size_t>& buggy_lines,
                              BugPattern pattern = BugPattern::Unknown, CommitMeta meta = {});

// Builds a clean sample (all labels zero, after == before).
DebugSample make_clean_sample(std::vector<std::string> lines, CommitMeta meta = {});

}  // namespace dlr
