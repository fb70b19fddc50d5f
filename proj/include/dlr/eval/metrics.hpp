#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dlr/corpus/bug_pattern.hpp"
#include "dlr/corpus/debug_sample.hpp"

namespace dlr::eval {

struct DetectionMetrics {
  double f1 = 0.0;
  std::optional<double> fpr;  // absent when there are no actual negatives
};

// F1 of the buggy class and FP / (FP + TN). Throws UsageError on empty or
// mismatched input.
DetectionMetrics detection_metrics(const std::vector<bool>& predictions, const std::vector<bool>& labels);

struct LocalizationMetrics {
  int k = 1;
  double mrr = 0.0;
  double map = 0.0;
  std::optional<double> fpr;  // absent when no sample has a non-buggy line
};

// `rankings[s]` orders all line indices of sample s, most suspicious first;
// `buggy[s]` lists its buggy lines (non-empty). Average precision at k
// divides by min(k, #buggy). FPR@k averages, over samples with at least one
// non-buggy line, the fraction of non-buggy lines that land in the top k.
LocalizationMetrics localization_metrics(const std::vector<std::vector<int>>& rankings,
                                         const std::vector<std::vector<int>>& buggy, int k);

struct RepairMetrics {
  double em = 0.0;
  double bleu = 0.0;  // 0..100
};

// Whitespace runs collapse to one space and both ends are trimmed.
bool exact_match(std::string_view hypothesis, std::string_view reference);

// Corpus-level BLEU over whitespace tokens with brevity penalty and no
// smoothing; any n-gram order without a match (or without n-grams) gives 0.
double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   int max_order = 4);

RepairMetrics repair_metrics(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                             int max_order = 4);

// Group key for the per-pattern breakdown: a buggy sample's own pattern, and
// for a clean sample the pattern of the buggy sample it was fixed from (same
// commit, before == that sample's after). Unpaired clean samples are Unknown.
std::vector<BugPattern> breakdown_groups(std::span<const DebugSample> samples);

// Detection F1 within each pattern group present in `patterns`; groups with
// fewer than two samples map to nullopt.
std::map<BugPattern, std::optional<double>> per_pattern_breakdown(const std::vector<bool>& predictions,
                                                                  const std::vector<bool>& labels,
                                                                  const std::vector<BugPattern>& patterns);

}  // namespace dlr::eval
