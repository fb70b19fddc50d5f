#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <json.hpp>

#include "dlr/common/random.hpp"
#include "dlr/corpus/example.hpp"
#include "dlr/model/checkpoint.hpp"
#include "dlr/model/config.hpp"
#include "dlr/model/parameters.hpp"
#include "dlr/model/transformer.hpp"

namespace dlr::train {

struct TrainConfig {
  model::ObjectiveMask mask = model::ObjectiveMask::all();
  int batch_size = 8;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int warmup_steps = 100;
  int max_steps = 2000;
  int eval_interval = 100;
  // Validations in a row without improvement that are tolerated; 0 stops at
  // the first one that fails to improve. Negative disables early stopping.
  int patience = 5;
  // Stop as soon as the validation score reaches this value.
  std::optional<double> target_score;
  double clip_norm = 1.0;
  std::uint64_t seed = 0;

  // Throws UsageError when the mask is empty or a rate is out of range.
  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig base);
};

// Parameters, Adam moments, data cursor and RNG: everything a resumed run
// needs to continue bit-for-bit.
struct TrainState {
  model::ModelParameters<float> params;
  model::ModelParameters<float> first_moment;
  model::ModelParameters<float> second_moment;
  std::int64_t step = 0;
  double best_score = -1.0;
  int bad_validations = 0;
  Rng rng;
  std::vector<std::size_t> order;  // current epoch permutation of the training set
  std::size_t cursor = 0;

  static TrainState fresh(const model::ModelConfig& config, const TrainConfig& train);
  model::Checkpoint to_checkpoint(const TrainConfig& train) const;
  // Throws DataError when the checkpoint lacks optimizer state.
  static TrainState from_checkpoint(const model::Checkpoint& checkpoint);
};

// Learning rate after linear warmup for the step about to be taken.
double learning_rate_at(const TrainConfig& config, std::int64_t step);

// One clipped Adam step on the joint loss. Throws NumericError naming the
// non-finite loss component, leaving the state untouched.
model::LossBundle train_step(TrainState& state, std::span<const TokenizedExample> batch, const TrainConfig& config);

// Draws the next batch from the epoch permutation, reshuffling at epoch ends.
std::vector<std::size_t> next_batch(TrainState& state, std::size_t dataset_size, int batch_size);

struct ValidationMetrics {
  std::optional<double> detect_f1;
  std::optional<double> localize_top1;  // MRR@1, which equals MAP@1
  std::optional<double> repair_em;
  double score = 0.0;  // mean of the metrics of the enabled objectives

  nlohmann::json to_json() const;
};

// Scores a model on validation examples for the objectives in `mask`.
// Repair exact match is judged on greedy decodes at the token level.
ValidationMetrics validate_model(const model::ModelParameters<float>& params, std::span<const TokenizedExample> val,
                                 model::ObjectiveMask mask);

struct FitOptions {
  std::ostream* log = nullptr;                   // JSONL, one record per validation
  std::optional<std::filesystem::path> last_checkpoint;  // rewritten at every validation
  std::optional<Tokenizer> tokenizer;            // stored in checkpoints
  std::function<void(const model::LossBundle&, std::int64_t)> on_step;
};

struct ValidationRecord {
  std::int64_t step = 0;
  model::LossBundle losses;
  ValidationMetrics metrics;
};

struct FitResult {
  model::Checkpoint best;
  std::vector<ValidationRecord> history;
  std::vector<model::LossBundle> step_losses;
  std::int64_t steps = 0;
  std::string stop_reason;
};

// Trains from `state` (fresh or resumed) until max_steps, early stop or the
// target score. Throws UsageError on an empty split.
FitResult fit(const TrainConfig& config, TrainState state, std::span<const TokenizedExample> train_set,
              std::span<const TokenizedExample> val_set, const FitOptions& options = {});

FitResult fit(const TrainConfig& config, const model::ModelConfig& model_config,
              std::span<const TokenizedExample> train_set, std::span<const TokenizedExample> val_set,
              const FitOptions& options = {});

}  // namespace dlr::train
