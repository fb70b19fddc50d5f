#include "dlr/corpus/split.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "dlr/common/error.hpp"

namespace dlr {

namespace {

std::uint64_t seeded_hash(std::uint64_t seed, const std::string& name) {
  // FNV-1a over the seed bytes followed by the name.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<unsigned char>(seed >> (8 * i)));
  for (unsigned char c : name) mix(c);
  return h;
}

}  // namespace

DatasetSplit split_by_project(std::span<const DebugSample> samples, SplitRatios ratios,
                              std::uint64_t seed) {
  const double ratio[3] = {ratios.train, ratios.val, ratios.test};
  double total = 0.0;
  int active = 0;
  for (double r : ratio) {
    if (r < 0.0) throw UsageError("split ratios must be non-negative");
    total += r;
    active += r > 0.0 ? 1 : 0;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("split ratios must sum to 1");

  std::set<std::string> project_set;
  for (const auto& s : samples) {
    if (s.meta.project.empty()) throw DataError("sample without a project name");
    project_set.insert(s.meta.project);
  }
  std::vector<std::string> projects(project_set.begin(), project_set.end());
  const auto n = static_cast<long>(projects.size());
  if (n < active) {
    throw DataError("need at least " + std::to_string(active) + " projects to split, have " +
                    std::to_string(n));
  }
  std::sort(projects.begin(), projects.end(), [seed](const std::string& a, const std::string& b) {
    const auto ha = seeded_hash(seed, a), hb = seeded_hash(seed, b);
    return ha != hb ? ha < hb : a < b;
  });

  long count[3];
  for (int k = 0; k < 3; ++k) {
    count[k] = std::lround(static_cast<double>(n) * ratio[k]);
    if (ratio[k] > 0.0) count[k] = std::max(count[k], 1L);
    if (ratio[k] == 0.0) count[k] = 0;
  }
  // Absorb rounding drift in the largest split that can give or take.
  long drift = n - (count[0] + count[1] + count[2]);
  while (drift != 0) {
    int target = 0;
    for (int k = 1; k < 3; ++k) {
      if (ratio[k] > ratio[target]) target = k;
    }
    if (drift > 0) {
      ++count[target];
      --drift;
    } else {
      int donor = -1;
      for (int k = 0; k < 3; ++k) {
        if (count[k] > 1 && (donor < 0 || count[k] > count[donor])) donor = k;
      }
      --count[donor];
      ++drift;
    }
  }

  std::map<std::string, int> assignment;
  long cursor = 0;
  for (int k = 0; k < 3; ++k) {
    for (long i = 0; i < count[k]; ++i) assignment[projects[static_cast<std::size_t>(cursor++)]] = k;
  }

  DatasetSplit out;
  for (const auto& s : samples) {
    switch (assignment.at(s.meta.project)) {
      case 0: out.train.push_back(s); break;
      case 1: out.val.push_back(s); break;
      default: out.test.push_back(s); break;
    }
  }
  return out;
}

SplitStatistics compute_statistics(std::span<const DebugSample> samples) {
  std::set<std::string> projects;
  for (const auto& s : samples) projects.insert(s.meta.project);
  return {projects.size(), samples.size()};
}

std::string format_split_table(const SplitStatistics& train, const SplitStatistics& val,
                               const SplitStatistics& test) {
  std::string out = "Split  #Projects  #Instances\n";
  char row[96];
  const std::pair<const char*, const SplitStatistics*> rows[] = {
      {"Train", &train}, {"Val", &val}, {"Test", &test}};
  for (const auto& [name, stats] : rows) {
    std::snprintf(row, sizeof row, "%-6s %9zu  %10zu\n", name, stats->projects, stats->instances);
    out += row;
  }
  return out;
}

}  // namespace dlr
