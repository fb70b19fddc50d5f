#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlr/corpus/bug_pattern.hpp"
#include "dlr/corpus/example.hpp"
#include "dlr/corpus/tokenizer.hpp"
#include "dlr/eval/metrics.hpp"
#include "dlr/model/predictor.hpp"

namespace dlr::eval {

struct MetricConfig {
  std::vector<int> ks{1, 5};
  int beam_width = 5;
  double length_penalty = 0.7;
  int bleu_order = 4;
  double threshold = 0.5;
  // Decide buggy/clean from the top repair candidate instead of the
  // detection head, for models trained on the repair loss alone.
  bool detect_via_repair = false;
  // Generated repairs stop after ratio * source length + offset tokens (and
  // never beyond the model's target limit).
  double max_len_ratio = 1.5;
  int max_len_offset = 16;

  void validate() const;
  nlohmann::json to_json() const;
  static MetricConfig from_json(const nlohmann::json& j, MetricConfig base);
};

struct EndToEndResult {
  std::optional<double> bl;  // MRR@5 on single-line data, MAP@5 otherwise
  std::optional<double> pr;  // BLEU, 0..100
  std::string bl_metric;     // "mrr@5" or "map@5"
  std::size_t detected = 0;
  std::size_t detected_buggy = 0;
  std::size_t false_positives = 0;
  std::vector<std::string> warnings;
};

struct MetricsReport {
  std::size_t num_samples = 0;
  std::size_t num_buggy = 0;
  DetectionMetrics detection;
  std::vector<LocalizationMetrics> localization;  // one per k, over buggy samples
  std::optional<RepairMetrics> repair;           // over buggy samples
  EndToEndResult end_to_end;
  std::map<BugPattern, std::optional<double>> per_pattern;
  std::map<BugPattern, std::size_t> pattern_counts;

  nlohmann::json to_json() const;
  // Plain-text tables: detection, localization per k, repair, end-to-end.
  std::string to_table() const;
  // "pattern,samples,f1" rows.
  std::string per_pattern_csv() const;
};

// Throws NumericError when MRR@k or FPR@k decreases as k grows, and for
// MAP@k when every buggy sample has a single buggy line.
void check_monotonicity(const MetricsReport& report);

// Decoded text of the best beam candidate, or "" when the beam is empty.
std::string top_repair_text(const model::Prediction& prediction, const Tokenizer& tok);

// Stage 1 classifies every example; stages 2 and 3 score localization and
// repair on the examples that are both flagged and truly buggy. When that
// subset is empty, BL and PR stay null and a warning is recorded.
EndToEndResult end_to_end_from_predictions(std::span<const model::Prediction> predictions,
                                           std::span<const TokenizedExample> examples, const Tokenizer& tok,
                                           const MetricConfig& config);

EndToEndResult end_to_end_eval(const model::Predictor& predictor, std::span<const TokenizedExample> examples,
                               const Tokenizer& tok, const MetricConfig& config);

// Runs the predictor once per example and fills every report section.
// `patterns[i]` is the pattern tag of example i.
MetricsReport evaluate(const model::Predictor& predictor, std::span<const TokenizedExample> examples,
                       std::span<const BugPattern> patterns, const Tokenizer& tok, const MetricConfig& config);

}  // namespace dlr::eval
