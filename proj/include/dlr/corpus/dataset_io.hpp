#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include <json.hpp>

#include "dlr/corpus/debug_sample.hpp"

namespace dlr {

// One dataset record:
// {"before", "after", "buggy_lines" (0-based), "label", "pattern",
//  "project", "commit_id", "commit_msg"}
nlohmann::json sample_to_json(const DebugSample& sample);

// "before", "after" and "buggy_lines" are required; the rest default.
// Throws DataError("missing field: <name>") or on invariant violations.
DebugSample sample_from_json(const nlohmann::json& record);

void write_dataset(std::ostream& out, std::span<const DebugSample> samples);
void write_dataset(const std::filesystem::path& path, std::span<const DebugSample> samples);

// Errors are prefixed with the 1-based record line number.
std::vector<DebugSample> read_dataset(std::istream& in);
std::vector<DebugSample> read_dataset(const std::filesystem::path& path);

}  // namespace dlr
