#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dlr/corpus/example.hpp"
#include "dlr/model/beam_search.hpp"
#include "dlr/model/parameters.hpp"

namespace dlr::model {

struct Prediction {
  double detect_prob = 0.5;
  std::vector<double> line_probs;  // one per SEP position
  std::vector<Hypothesis> repair_beam;  // best first

  bool buggy() const;
  // Line indices by descending probability, ties to the smaller index.
  std::vector<int> line_ranking() const;
};

// Line indices ordered by descending score, equal scores by ascending index.
std::vector<int> rank_lines(std::span<const double> scores);

// Which heads to run. Skipping the repair head saves the beam search.
struct PredictOptions {
  bool detect = true;
  bool localize = true;
  bool repair = true;
  BeamConfig beam;
};

class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Prediction predict(const TokenizedExample& example, const PredictOptions& options) const = 0;
};

class ModelPredictor final : public Predictor {
 public:
  explicit ModelPredictor(const ModelParameters<float>& params) : params_(params) {}
  Prediction predict(const TokenizedExample& example, const PredictOptions& options) const override;

 private:
  const ModelParameters<float>& params_;
};

// Treats the repair head as a detector: buggy iff the candidate is non-empty
// and differs from the input after whitespace normalization. `input_text` may
// still carry line sentinels.
bool detect_via_repair(std::string_view input_text, std::string_view candidate);

}  // namespace dlr::model
