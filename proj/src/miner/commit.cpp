#include "dlr/miner/commit.hpp"

#include <fstream>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"

namespace dlr::miner {

using nlohmann::json;

json commit_to_json(const CommitRecord& commit) {
  json files = json::array();
  for (const auto& f : commit.files) files.push_back({{"path", f.path}, {"before", f.before}, {"after", f.after}});
  return {{"commit_id", commit.commit_id},
          {"message", commit.message},
          {"project", commit.project},
          {"language", std::string(language_name(commit.language))},
          {"files", files}};
}

CommitRecord commit_from_json(const json& record) {
  if (!record.is_object()) throw DataError("commit record is not a JSON object");
  for (const char* field : {"commit_id", "message", "files", "language"}) {
    if (!record.contains(field)) throw DataError(std::string("missing field: ") + field);
  }
  try {
    CommitRecord c;
    c.commit_id = record.at("commit_id").get<std::string>();
    c.message = record.at("message").get<std::string>();
    if (record.contains("project") && !record.at("project").is_null()) {
      c.project = record.at("project").get<std::string>();
    }
    if (c.project.empty()) c.project = "default";
    const auto lang_name = record.at("language").get<std::string>();
    const auto lang = parse_language(lang_name);
    if (!lang) throw DataError("unsupported language: " + lang_name);
    c.language = *lang;
    for (const auto& f : record.at("files")) {
      FileChange change;
      if (!f.contains("path")) throw DataError("missing field: files[].path");
      change.path = f.at("path").get<std::string>();
      if (f.contains("before") && !f.at("before").is_null()) change.before = f.at("before").get<std::string>();
      if (f.contains("after") && !f.at("after").is_null()) change.after = f.at("after").get<std::string>();
      if (change.before.empty() && change.after.empty()) {
        throw DataError("file " + change.path + " has neither before nor after text");
      }
      c.files.push_back(std::move(change));
    }
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("wrong field type: ") + e.what());
  }
}

void write_commit_export(const std::filesystem::path& path, const std::vector<CommitRecord>& commits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& c : commits) out << commit_to_json(c).dump() << '\n';
}

std::vector<CommitRecord> read_commit_export(std::istream& in) {
  std::vector<CommitRecord> commits;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      commits.push_back(commit_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return commits;
}

std::vector<CommitRecord> read_commit_export(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_commit_export(in);
}

}  // namespace dlr::miner
