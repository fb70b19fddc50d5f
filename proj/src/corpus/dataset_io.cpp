#include "dlr/corpus/dataset_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"

namespace dlr {

using nlohmann::json;

json sample_to_json(const DebugSample& sample) {
  json j;
  j["before"] = text::join_lines(sample.before_lines);
  j["after"] = text::join_lines(sample.after_lines);
  j["buggy_lines"] = sample.buggy_lines();
  j["label"] = sample.function_label ? 1 : 0;
  j["pattern"] = sample.pattern == BugPattern::Unknown ? json(nullptr)
                                                       : json(std::string(pattern_name(sample.pattern)));
  j["project"] = sample.meta.project;
  j["commit_id"] = sample.meta.commit_id;
  j["commit_msg"] = sample.meta.commit_message;
  return j;
}

namespace {

const json& require(const json& record, const char* field) {
  if (!record.contains(field)) throw DataError(std::string("missing field: ") + field);
  return record.at(field);
}

std::string optional_string(const json& record, const char* field) {
  if (!record.contains(field) || record.at(field).is_null()) return {};
  return record.at(field).get<std::string>();
}

}  // namespace

DebugSample sample_from_json(const json& record) {
  if (!record.is_object()) throw DataError("record is not a JSON object");
  try {
    DebugSample s;
    s.before_lines = text::split_lines(require(record, "before").get<std::string>());
    s.after_lines = text::split_lines(require(record, "after").get<std::string>());
    s.line_labels.assign(s.before_lines.size(), 0);
    for (const auto& v : require(record, "buggy_lines")) {
      const auto idx = v.get<long long>();
      if (idx < 0 || static_cast<std::size_t>(idx) >= s.before_lines.size()) {
        throw DataError("buggy line " + std::to_string(idx) + " out of range");
      }
      s.line_labels[static_cast<std::size_t>(idx)] = 1;
    }
    bool any = false;
    for (auto v : s.line_labels) any = any || v;
    s.function_label = any;
    if (record.contains("label") && !record.at("label").is_null()) {
      const int label = record.at("label").get<int>();
      if (label != 0 && label != 1) throw DataError("label must be 0 or 1");
      if ((label == 1) != any) throw DataError("label disagrees with buggy_lines");
    }
    if (record.contains("pattern") && !record.at("pattern").is_null()) {
      const auto name = record.at("pattern").get<std::string>();
      const auto pattern = parse_pattern(name);
      if (!pattern) throw DataError("unknown pattern: " + name);
      s.pattern = *pattern;
    }
    s.meta.project = optional_string(record, "project");
    s.meta.commit_id = optional_string(record, "commit_id");
    s.meta.commit_message = optional_string(record, "commit_msg");
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("wrong field type: ") + e.what());
  }
}

void write_dataset(std::ostream& out, std::span<const DebugSample> samples) {
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

void write_dataset(const std::filesystem::path& path, std::span<const DebugSample> samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_dataset(out, samples);
}

std::vector<DebugSample> read_dataset(std::istream& in) {
  std::vector<DebugSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      const auto record = json::parse(line);
      samples.push_back(sample_from_json(record));
    } catch (const json::parse_error& e) {
      throw DataError("line " + std::to_string(line_no) + ": malformed record: " + e.what());
    } catch (const DataError& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return samples;
}

std::vector<DebugSample> read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return read_dataset(in);
}

}  // namespace dlr
