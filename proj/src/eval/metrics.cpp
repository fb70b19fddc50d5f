#include "dlr/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"

namespace dlr::eval {

DetectionMetrics detection_metrics(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  if (predictions.empty()) throw UsageError("detection metrics need at least one sample");
  if (predictions.size() != labels.size()) throw UsageError("prediction and label counts differ");
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (predictions[i] && labels[i]) ++tp;
    else if (predictions[i]) ++fp;
    else if (labels[i]) ++fn;
    else ++tn;
  }
  DetectionMetrics m;
  if (tp > 0) m.f1 = 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
  if (fp + tn > 0) m.fpr = static_cast<double>(fp) / static_cast<double>(fp + tn);
  return m;
}

LocalizationMetrics localization_metrics(const std::vector<std::vector<int>>& rankings,
                                         const std::vector<std::vector<int>>& buggy, int k) {
  if (k <= 0) throw UsageError("k must be positive");
  if (rankings.empty()) throw UsageError("localization metrics need at least one sample");
  if (rankings.size() != buggy.size()) throw UsageError("ranking and buggy-set counts differ");
  LocalizationMetrics m;
  m.k = k;
  double fpr_sum = 0.0;
  std::size_t fpr_count = 0;
  for (std::size_t s = 0; s < rankings.size(); ++s) {
    if (buggy[s].empty()) throw UsageError("sample " + std::to_string(s) + " has no buggy line");
    const std::unordered_set<int> relevant(buggy[s].begin(), buggy[s].end());
    const auto& ranking = rankings[s];
    const std::size_t depth = std::min(ranking.size(), static_cast<std::size_t>(k));
    std::size_t hits = 0;
    double precision_sum = 0.0;
    double reciprocal = 0.0;
    for (std::size_t r = 0; r < depth; ++r) {
      if (!relevant.contains(ranking[r])) continue;
      ++hits;
      precision_sum += static_cast<double>(hits) / static_cast<double>(r + 1);
      if (hits == 1) reciprocal = 1.0 / static_cast<double>(r + 1);
    }
    m.mrr += reciprocal;
    m.map += precision_sum / static_cast<double>(std::min(relevant.size(), static_cast<std::size_t>(k)));
    const std::size_t clean_lines = ranking.size() - relevant.size();
    if (clean_lines > 0) {
      fpr_sum += static_cast<double>(depth - hits) / static_cast<double>(clean_lines);
      ++fpr_count;
    }
  }
  const auto n = static_cast<double>(rankings.size());
  m.mrr /= n;
  m.map /= n;
  if (fpr_count > 0) m.fpr = fpr_sum / static_cast<double>(fpr_count);
  return m;
}

bool exact_match(std::string_view hypothesis, std::string_view reference) {
  return text::normalize_whitespace(hypothesis) == text::normalize_whitespace(reference);
}

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double corpus_bleu(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                   int max_order) {
  if (hypotheses.size() != references.size()) throw UsageError("hypothesis and reference counts differ");
  if (max_order <= 0) throw UsageError("BLEU order must be positive");
  const auto order = static_cast<std::size_t>(max_order);
  std::vector<std::size_t> matched(order, 0), possible(order, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = text::split_whitespace(hypotheses[i]);
    const auto ref = text::split_whitespace(references[i]);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= order; ++n) {
      const auto ref_counts = count_ngrams(ref, n);
      for (const auto& [gram, count] : count_ngrams(hyp, n)) {
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
      }
      if (hyp.size() >= n) possible[n - 1] += hyp.size() - n + 1;
    }
  }
  double log_precision = 0.0;
  for (std::size_t n = 0; n < order; ++n) {
    if (matched[n] == 0 || possible[n] == 0) return 0.0;
    log_precision += std::log(static_cast<double>(matched[n]) / static_cast<double>(possible[n]));
  }
  const double c = static_cast<double>(hyp_len);
  const double r = static_cast<double>(ref_len);
  const double brevity = c > r ? 1.0 : std::exp(1.0 - r / c);
  return 100.0 * brevity * std::exp(log_precision / static_cast<double>(order));
}

RepairMetrics repair_metrics(const std::vector<std::string>& hypotheses, const std::vector<std::string>& references,
                             int max_order) {
  if (hypotheses.size() != references.size()) throw UsageError("hypothesis and reference counts differ");
  RepairMetrics m;
  if (hypotheses.empty()) return m;
  std::size_t exact = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (exact_match(hypotheses[i], references[i])) ++exact;
  }
  m.em = static_cast<double>(exact) / static_cast<double>(hypotheses.size());
  m.bleu = corpus_bleu(hypotheses, references, max_order);
  return m;
}

std::vector<BugPattern> breakdown_groups(std::span<const DebugSample> samples) {
  std::map<std::pair<std::string, std::vector<std::string>>, BugPattern> fixed;
  for (const auto& s : samples) {
    if (s.function_label) fixed.emplace(std::make_pair(s.meta.commit_id, s.after_lines), s.pattern);
  }
  std::vector<BugPattern> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    if (s.function_label) {
      out.push_back(s.pattern);
      continue;
    }
    const auto it = fixed.find({s.meta.commit_id, s.before_lines});
    out.push_back(it == fixed.end() ? BugPattern::Unknown : it->second);
  }
  return out;
}

std::map<BugPattern, std::optional<double>> per_pattern_breakdown(const std::vector<bool>& predictions,
                                                                  const std::vector<bool>& labels,
                                                                  const std::vector<BugPattern>& patterns) {
  if (predictions.size() != labels.size() || labels.size() != patterns.size()) {
    throw UsageError("per-pattern inputs differ in length");
  }
  std::map<BugPattern, std::pair<std::vector<bool>, std::vector<bool>>> groups;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    auto& g = groups[patterns[i]];
    g.first.push_back(predictions[i]);
    g.second.push_back(labels[i]);
  }
  std::map<BugPattern, std::optional<double>> out;
  for (const auto& [pattern, group] : groups) {
    out[pattern] = group.first.size() < 2 ? std::nullopt
                                          : std::optional<double>(detection_metrics(group.first, group.second).f1);
  }
  return out;
}

}  // namespace dlr::eval
