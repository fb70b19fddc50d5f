#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dlr/corpus/debug_sample.hpp"

namespace dlr {

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct DatasetSplit {
  std::vector<DebugSample> train;
  std::vector<DebugSample> val;
  std::vector<DebugSample> test;
};

// Partitions at project granularity: every project lands wholly in one split.
// Projects are ordered by a seeded hash of their name, so the assignment
// depends only on the project set and the seed. Within a split, samples keep
// their input order.
DatasetSplit split_by_project(std::span<const DebugSample> samples, SplitRatios ratios,
                              std::uint64_t seed);

struct SplitStatistics {
  std::size_t projects = 0;
  std::size_t instances = 0;
};

SplitStatistics compute_statistics(std::span<const DebugSample> samples);

// Plain-text table with #Projects / #Instances rows for Train, Val, Test.
std::string format_split_table(const SplitStatistics& train, const SplitStatistics& val,
                               const SplitStatistics& test);

}  // namespace dlr
