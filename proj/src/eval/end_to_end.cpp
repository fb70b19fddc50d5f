#include "dlr/eval/end_to_end.hpp"

#include <algorithm>

#include "dlr/common/error.hpp"
#include "dlr/model/transformer.hpp"

namespace dlr::eval {

void MetricConfig::validate() const {
  if (ks.empty()) throw UsageError("at least one k is required");
  for (int k : ks) {
    if (k <= 0) throw UsageError("k values must be positive");
  }
  if (beam_width <= 0) throw UsageError("beam width must be positive");
  if (bleu_order <= 0) throw UsageError("BLEU order must be positive");
  if (!(threshold > 0.0 && threshold < 1.0)) throw UsageError("threshold must lie in (0, 1)");
  if (max_len_ratio < 0 || max_len_offset <= 0) throw UsageError("generation length bounds must be positive");
}

nlohmann::json MetricConfig::to_json() const {
  return {{"ks", ks},
          {"beam_width", beam_width},
          {"length_penalty", length_penalty},
          {"bleu_order", bleu_order},
          {"threshold", threshold},
          {"detect_via_repair", detect_via_repair},
          {"max_len_ratio", max_len_ratio},
          {"max_len_offset", max_len_offset}};
}

MetricConfig MetricConfig::from_json(const nlohmann::json& j, MetricConfig base) {
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("ks", base.ks);
    get("beam_width", base.beam_width);
    get("length_penalty", base.length_penalty);
    get("bleu_order", base.bleu_order);
    get("threshold", base.threshold);
    get("detect_via_repair", base.detect_via_repair);
    get("max_len_ratio", base.max_len_ratio);
    get("max_len_offset", base.max_len_offset);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("metric config: ") + e.what());
  }
  return base;
}

std::string top_repair_text(const model::Prediction& prediction, const Tokenizer& tok) {
  if (prediction.repair_beam.empty()) return "";
  return tok.decode(prediction.repair_beam.front().tokens);
}

namespace {

bool verdict(const model::Prediction& p, const TokenizedExample& ex, const Tokenizer& tok,
             const MetricConfig& config) {
  if (config.detect_via_repair) return model::detect_via_repair(tok.decode(ex.input_ids), top_repair_text(p, tok));
  return model::is_buggy(p.detect_prob, config.threshold);
}

std::vector<int> buggy_lines(const TokenizedExample& ex) {
  std::vector<int> out;
  for (std::size_t i = 0; i < ex.line_labels.size(); ++i) {
    if (ex.line_labels[i]) out.push_back(static_cast<int>(i));
  }
  return out;
}

bool all_single_line(std::span<const TokenizedExample> examples) {
  return std::all_of(examples.begin(), examples.end(),
                     [](const TokenizedExample& ex) { return !ex.function_label || buggy_lines(ex).size() == 1; });
}

model::PredictOptions options_for(const TokenizedExample& ex, const MetricConfig& config) {
  model::PredictOptions o;
  o.detect = !config.detect_via_repair;
  o.localize = ex.function_label;
  o.repair = ex.function_label || config.detect_via_repair;
  o.beam.width = config.beam_width;
  o.beam.length_penalty = config.length_penalty;
  return o;
}

model::Prediction run(const model::Predictor& predictor, const TokenizedExample& ex, const MetricConfig& config) {
  auto o = options_for(ex, config);
  o.beam.max_len = static_cast<int>(config.max_len_ratio * static_cast<double>(ex.input_ids.size())) +
                   config.max_len_offset;
  return predictor.predict(ex, o);
}

}  // namespace

EndToEndResult end_to_end_from_predictions(std::span<const model::Prediction> predictions,
                                           std::span<const TokenizedExample> examples, const Tokenizer& tok,
                                           const MetricConfig& config) {
  if (predictions.size() != examples.size()) throw UsageError("prediction and example counts differ");
  EndToEndResult r;
  const bool single = all_single_line(examples);
  r.bl_metric = single ? "mrr@5" : "map@5";
  std::vector<std::vector<int>> rankings, buggy_sets;
  std::vector<std::string> hyps, refs;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (!verdict(predictions[i], examples[i], tok, config)) continue;
    ++r.detected;
    if (!examples[i].function_label) {
      ++r.false_positives;
      continue;
    }
    ++r.detected_buggy;
    rankings.push_back(predictions[i].line_ranking());
    buggy_sets.push_back(buggy_lines(examples[i]));
    hyps.push_back(top_repair_text(predictions[i], tok));
    refs.push_back(tok.decode(examples[i].target_ids));
  }
  if (rankings.empty()) {
    r.warnings.push_back("no example is both flagged and truly buggy; BL and PR are undefined");
    return r;
  }
  const auto loc = localization_metrics(rankings, buggy_sets, 5);
  r.bl = single ? loc.mrr : loc.map;
  r.pr = corpus_bleu(hyps, refs, config.bleu_order);
  return r;
}

EndToEndResult end_to_end_eval(const model::Predictor& predictor, std::span<const TokenizedExample> examples,
                               const Tokenizer& tok, const MetricConfig& config) {
  config.validate();
  std::vector<model::Prediction> predictions;
  for (const auto& ex : examples) predictions.push_back(run(predictor, ex, config));
  return end_to_end_from_predictions(predictions, examples, tok, config);
}

MetricsReport evaluate(const model::Predictor& predictor, std::span<const TokenizedExample> examples,
                       std::span<const BugPattern> patterns, const Tokenizer& tok, const MetricConfig& config) {
  config.validate();
  if (examples.empty()) throw UsageError("evaluation set is empty");
  if (patterns.size() != examples.size()) throw UsageError("pattern and example counts differ");

  std::vector<model::Prediction> predictions;
  predictions.reserve(examples.size());
  for (const auto& ex : examples) predictions.push_back(run(predictor, ex, config));

  MetricsReport report;
  report.num_samples = examples.size();
  std::vector<bool> verdicts, labels;
  std::vector<std::vector<int>> rankings, buggy_sets;
  std::vector<std::string> hyps, refs;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    verdicts.push_back(verdict(predictions[i], ex, tok, config));
    labels.push_back(ex.function_label);
    if (!ex.function_label) continue;
    ++report.num_buggy;
    rankings.push_back(predictions[i].line_ranking());
    buggy_sets.push_back(buggy_lines(ex));
    hyps.push_back(top_repair_text(predictions[i], tok));
    refs.push_back(tok.decode(ex.target_ids));
  }
  report.detection = detection_metrics(verdicts, labels);
  if (!rankings.empty()) {
    for (int k : config.ks) report.localization.push_back(localization_metrics(rankings, buggy_sets, k));
    report.repair = repair_metrics(hyps, refs, config.bleu_order);
  }
  report.end_to_end = end_to_end_from_predictions(predictions, examples, tok, config);
  report.per_pattern =
      per_pattern_breakdown(verdicts, labels, std::vector<BugPattern>(patterns.begin(), patterns.end()));
  for (auto p : patterns) ++report.pattern_counts[p];
  check_monotonicity(report);
  return report;
}

}  // namespace dlr::eval
