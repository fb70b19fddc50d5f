#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dlr/common/random.hpp"
#include "dlr/corpus/bug_pattern.hpp"
#include "dlr/corpus/debug_sample.hpp"
#include "dlr/miner/commit.hpp"

namespace dlr::train {

// One templated Java method in a fixed and a broken version. The broken
// version differs in exactly one line, by a mutation of the given pattern.
struct SyntheticFunction {
  std::string name;
  std::vector<std::string> fixed;
  std::vector<std::string> broken;
  std::size_t buggy_line = 0;
  BugPattern pattern = BugPattern::Unknown;
};

SyntheticFunction synthesize_function(BugPattern pattern, Rng& rng);

struct SyntheticOptions {
  int num_projects = 8;
  // Extra commits whose message carries no bug-fix keyword.
  int noise_commits = 0;
};

// `bugfix_commits` commits cycling through the thirteen patterns, each
// touching one file that holds the mutated method and an unchanged helper.
std::vector<miner::CommitRecord> synthetic_commits(int bugfix_commits, std::uint64_t seed,
                                                   const SyntheticOptions& options = {});

// Mines synthetic commits into `num_samples` samples (half buggy, half
// clean). `num_samples` must be even.
std::vector<DebugSample> synthetic_corpus(int num_samples, std::uint64_t seed, const SyntheticOptions& options = {});

}  // namespace dlr::train
