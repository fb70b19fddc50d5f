#include "dlr/miner/sample_builder.hpp"

#include <algorithm>
#include <tuple>

#include "dlr/common/text.hpp"
#include "dlr/miner/functions.hpp"
#include "dlr/miner/keywords.hpp"
#include "dlr/miner/line_diff.hpp"
#include "dlr/miner/pairing.hpp"
#include "dlr/miner/pattern_classifier.hpp"

namespace dlr::miner {

nlohmann::json MiningStats::to_json() const {
  return {{"commits_scanned", commits_scanned},
          {"bugfix_commits", bugfix_commits},
          {"function_pairs", function_pairs},
          {"samples_emitted", samples_emitted},
          {"skipped", skipped},
          {"patterns", patterns}};
}

namespace {

struct Keyed {
  std::string commit_id;
  std::string path;
  std::string function;
  std::size_t line;
  int order;  // 0 = buggy, 1 = clean
  DebugSample sample;
};

}  // namespace

MiningResult build_samples(std::span<const CommitRecord> commits) {
  MiningResult result;
  auto& stats = result.stats;
  std::vector<Keyed> keyed;

  for (const auto& commit : commits) {
    ++stats.commits_scanned;
    if (!is_bugfix_commit(commit.message)) continue;
    ++stats.bugfix_commits;
    const CommitMeta meta{commit.project, commit.commit_id, commit.message};
    for (const auto& file : commit.files) {
      if (file.before.empty() || file.after.empty()) {
        ++stats.skipped["file added or deleted"];
        continue;
      }
      const auto before = extract_functions(file.before, commit.language);
      const auto after = extract_functions(file.after, commit.language);
      if (const auto w = before.warnings.size() + after.warnings.size()) stats.skipped["parse warning"] += w;
      const auto pairing = pair_functions(before.functions, after.functions);
      if (pairing.ambiguous) stats.skipped["ambiguous function"] += pairing.ambiguous;
      for (const auto& [fb, fa] : pairing.pairs) {
        ++stats.function_pairs;
        if (fb.signature != fa.signature) {
          ++stats.skipped["signature changed"];
          continue;
        }
        const auto before_lines = text::dedent(fb.body_lines);
        const auto after_lines = text::dedent(fa.body_lines);
        const auto diff = diff_lines(before_lines, after_lines);
        if (diff.empty()) {
          ++stats.skipped["unchanged"];
          continue;
        }
        if (diff.changed_before.empty()) {
          ++stats.skipped["insertion only"];
          continue;
        }
        BugPattern pattern = BugPattern::Unknown;
        if (diff.changed_before.size() == 1 && diff.changed_after.size() == 1) {
          pattern = classify_pattern(before_lines[diff.changed_before[0]], after_lines[diff.changed_after[0]],
                                     commit.language);
        }
        ++stats.patterns[std::string(pattern_name(pattern))];
        keyed.push_back({commit.commit_id, file.path, fb.name, fb.start_line, 0,
                         make_buggy_sample(before_lines, after_lines, diff.changed_before, pattern, meta)});
        keyed.push_back({commit.commit_id, file.path, fb.name, fb.start_line, 1,
                         make_clean_sample(after_lines, meta)});
      }
    }
  }

  std::stable_sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.commit_id, a.path, a.function, a.line, a.order) <
           std::tie(b.commit_id, b.path, b.function, b.line, b.order);
  });
  result.samples.reserve(keyed.size());
  for (auto& k : keyed) result.samples.push_back(std::move(k.sample));
  stats.samples_emitted = result.samples.size();
  return result;
}

}  // namespace dlr::miner
