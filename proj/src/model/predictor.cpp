#include "dlr/model/predictor.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "dlr/common/text.hpp"
#include "dlr/corpus/sentinel.hpp"
#include "dlr/model/transformer.hpp"

namespace dlr::model {

bool Prediction::buggy() const { return is_buggy(detect_prob); }

std::vector<int> Prediction::line_ranking() const { return rank_lines(line_probs); }

std::vector<int> rank_lines(std::span<const double> scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&scores](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return order;
}

Prediction ModelPredictor::predict(const TokenizedExample& example, const PredictOptions& options) const {
  Prediction out;
  const Matrix<float> encoded = encode(params_, example.input_ids);
  if (options.detect) out.detect_prob = detect(params_, encoded, example.last_position());
  if (options.localize) out.line_probs = localize(params_, encoded, example.sep_positions);
  if (options.repair) {
    DecoderSession<float> session(params_, encoded);
    BeamConfig beam = options.beam;
    beam.max_len = std::min(beam.max_len, params_.config.max_target_len - 1);
    out.repair_beam = beam_search(session, beam);
  }
  return out;
}

bool detect_via_repair(std::string_view input_text, std::string_view candidate) {
  const std::string cand = text::normalize_whitespace(candidate);
  if (cand.empty()) return false;
  std::string input(input_text);
  if (input.find(kSentinelMarker) != std::string::npos) {
    input = text::join_lines(strip_line_sentinels(input));
  }
  return cand != text::normalize_whitespace(input);
}

}  // namespace dlr::model
