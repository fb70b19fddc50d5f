#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlr/corpus/debug_sample.hpp"
#include "dlr/miner/commit.hpp"

namespace dlr::miner {

struct MiningStats {
  std::size_t commits_scanned = 0;
  std::size_t bugfix_commits = 0;
  std::size_t function_pairs = 0;
  std::size_t samples_emitted = 0;
  std::map<std::string, std::size_t> skipped;   // reason -> count
  std::map<std::string, std::size_t> patterns;  // pattern name -> buggy samples

  nlohmann::json to_json() const;
};

struct MiningResult {
  std::vector<DebugSample> samples;
  MiningStats stats;
};

// For every bug-fix commit and every changed function pair, emits a buggy
// sample (before version, changed lines labelled, fixed version as target)
// followed by a clean sample (after version). Single-line changes get a
// pattern tag. Output is sorted by (commit id, file path, function name).
MiningResult build_samples(std::span<const CommitRecord> commits);

}  // namespace dlr::miner
