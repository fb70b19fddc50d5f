#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlr/miner/code_lexer.hpp"

namespace dlr::miner {

struct FileChange {
  std::string path;
  std::string before;  // empty when the file was added
  std::string after;   // empty when the file was deleted
};

struct CommitRecord {
  std::string commit_id;
  std::string message;
  std::string project;
  Language language = Language::Java;
  std::vector<FileChange> files;
};

// Export line: {"commit_id", "message", "files": [{"path", "before",
// "after"}], "language", "project" (optional)}.
nlohmann::json commit_to_json(const CommitRecord& commit);
CommitRecord commit_from_json(const nlohmann::json& record);

void write_commit_export(const std::filesystem::path& path, const std::vector<CommitRecord>& commits);
// Errors carry the 1-based line number of the offending record.
std::vector<CommitRecord> read_commit_export(std::istream& in);
std::vector<CommitRecord> read_commit_export(const std::filesystem::path& path);

}  // namespace dlr::miner
